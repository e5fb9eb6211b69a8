// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "cocoaan/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "cocoaan/errors.hpp"
#include "cocoaan/image_io.hpp"

namespace cocoaan {

void write_manifest_csv(const Manifest& manifest, std::ostream& out) {
  out << "role,id,label\n";
  for (std::size_t i = 0; i < manifest.style_labels.size(); ++i) {
    out << "style," << i << ',' << manifest.style_labels[i] << '\n';
  }
  for (std::size_t i = 0; i < manifest.content_labels.size(); ++i) {
    out << "content," << i << ',' << manifest.content_labels[i] << '\n';
  }
}

Manifest read_manifest_csv(std::istream& in) {
  Manifest m;
  std::string line;
  if (!std::getline(in, line) || line != "role,id,label") {
    throw DataError("manifest: missing 'role,id,label' header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    if (a == std::string::npos || b == std::string::npos) throw DataError("manifest: bad row " + line);
    const std::string role = line.substr(0, a);
    const auto id = static_cast<std::size_t>(std::stoll(line.substr(a + 1, b - a - 1)));
    auto& labels = role == "style" ? m.style_labels : m.content_labels;
    if (role != "style" && role != "content") throw DataError("manifest: bad role in " + line);
    if (id != labels.size()) throw DataError("manifest: ids must be dense and ordered: " + line);
    labels.push_back(line.substr(b + 1));
  }
  return m;
}

GlyphDataset::GlyphDataset(int resolution, Manifest manifest)
    : resolution_(resolution), manifest_(std::move(manifest)) {
  if (resolution < 1) throw DataError("dataset resolution must be positive");
}

void GlyphDataset::add(CellKey key, std::vector<double> pixels) {
  if (pixels.size() != static_cast<std::size_t>(resolution_) * resolution_) {
    throw DataError("glyph has " + std::to_string(pixels.size()) + " pixels, expected " +
                    std::to_string(resolution_) + "x" + std::to_string(resolution_));
  }
  if (key.style < 0 || key.style >= static_cast<Id>(manifest_.style_labels.size()) ||
      key.content < 0 || key.content >= static_cast<Id>(manifest_.content_labels.size())) {
    throw DataError("glyph key outside the manifest");
  }
  for (double v : pixels) {
    if (!(v >= -1.0 && v <= 1.0)) throw DataError("glyph pixel outside [-1, 1]");
  }
  if (contains(key)) {
    images_[index_[key]] = std::move(pixels);
    return;
  }
  // Keep cells sorted; rebuild the index after insertion.
  const auto pos = std::lower_bound(cells_.begin(), cells_.end(), key);
  const auto offset = pos - cells_.begin();
  cells_.insert(pos, key);
  images_.insert(images_.begin() + offset, std::move(pixels));
  for (auto i = static_cast<std::size_t>(offset); i < cells_.size(); ++i) index_[cells_[i]] = i;
}

std::span<const double> GlyphDataset::image(CellKey key) const {
  auto it = index_.find(key);
  if (it == index_.end()) {
    throw DataError("no glyph for style " + std::to_string(key.style) + ", content " +
                    std::to_string(key.content));
  }
  return images_[it->second];
}

std::vector<Id> GlyphDataset::style_ids() const {
  std::set<Id> ids;
  for (const auto& c : cells_) ids.insert(c.style);
  return {ids.begin(), ids.end()};
}

std::vector<Id> GlyphDataset::content_ids() const {
  std::set<Id> ids;
  for (const auto& c : cells_) ids.insert(c.content);
  return {ids.begin(), ids.end()};
}

Tensor GlyphDataset::batch(std::span<const CellKey> keys) const {
  if (keys.empty()) throw ShapeError("empty glyph batch");
  const std::size_t plane = static_cast<std::size_t>(resolution_) * resolution_;
  std::vector<double> out;
  out.reserve(keys.size() * plane);
  for (const auto& k : keys) {
    const auto img = image(k);
    out.insert(out.end(), img.begin(), img.end());
  }
  return Tensor({static_cast<std::int64_t>(keys.size()), 1, resolution_, resolution_},
                std::move(out));
}

GlyphDataset GlyphDataset::filter_styles(const std::set<Id>& styles) const {
  GlyphDataset out(resolution_, manifest_);
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (styles.count(cells_[i].style)) {
      out.index_[cells_[i]] = out.cells_.size();
      out.cells_.push_back(cells_[i]);
      out.images_.push_back(images_[i]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic glyphs.

void SynthConfig::validate() const {
  if (n_styles < 2 || n_contents < 2) throw ConfigError("synthetic data needs >= 2 styles and contents");
  if (resolution < 16) throw ConfigError("synthetic resolution must be >= 16");
  if (!(thickness_min > 0 && thickness_min <= thickness_max)) throw ConfigError("bad thickness range");
  if (!(slant_min_deg <= slant_max_deg) || std::fabs(slant_min_deg) >= 60 || std::fabs(slant_max_deg) >= 60) {
    throw ConfigError("bad slant range");
  }
  if (!(scale_min > 0 && scale_min <= scale_max && scale_max <= 1.5)) throw ConfigError("bad scale range");
  if (!(serif_probability >= 0 && serif_probability <= 1)) throw ConfigError("bad serif probability");
}

namespace {

struct Point {
  double x, y;
};
using Polyline = std::vector<Point>;

constexpr int kLattice = 5;
constexpr double kLatticeLo = 0.18;
constexpr double kLatticeHi = 0.82;
constexpr int kArcSegments = 12;

Point lattice_point(Rng& rng) {
  const double step = (kLatticeHi - kLatticeLo) / (kLattice - 1);
  return {kLatticeLo + step * static_cast<double>(rng.below(kLattice)),
          kLatticeLo + step * static_cast<double>(rng.below(kLattice))};
}

// Stroke layout in unit coordinates (y down); 3-8 line/arc primitives.
std::vector<Polyline> content_layout(const SynthConfig& cfg, Id content) {
  Rng rng = Rng(cfg.seed, 0x1000).split(static_cast<std::uint64_t>(content));
  const int count = 3 + static_cast<int>(rng.below(6));
  std::vector<Polyline> strokes;
  for (int i = 0; i < count; ++i) {
    if (rng.uniform() < 0.65) {
      Point a = lattice_point(rng);
      Point b = lattice_point(rng);
      while (a.x == b.x && a.y == b.y) b = lattice_point(rng);
      strokes.push_back({a, b});
    } else {
      const Point c = lattice_point(rng);
      static constexpr double kRadii[] = {0.14, 0.22, 0.3};
      const double r = kRadii[rng.below(3)];
      const double start = static_cast<double>(rng.below(8)) * std::numbers::pi / 4.0;
      const double sweep = static_cast<double>(2 + rng.below(5)) * std::numbers::pi / 4.0;
      Polyline arc;
      for (int s = 0; s <= kArcSegments; ++s) {
        const double t = start + sweep * s / kArcSegments;
        arc.push_back({std::clamp(c.x + r * std::cos(t), 0.08, 0.92),
                       std::clamp(c.y + r * std::sin(t), 0.08, 0.92)});
      }
      strokes.push_back(std::move(arc));
    }
  }
  return strokes;
}

double segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = a.x + t * dx - p.x;
  const double ey = a.y + t * dy - p.y;
  return std::sqrt(ex * ex + ey * ey);
}

std::vector<double> render(const std::vector<Polyline>& layout, const SynthStyle& style, int res) {
  const double shear = std::tan(style.slant_deg * std::numbers::pi / 180.0);
  auto to_pixels = [&](Point p) {
    Point q{0.5 + style.scale * (p.x - 0.5), 0.5 + style.scale * (p.y - 0.5)};
    q.x += shear * (0.5 - q.y);
    return Point{q.x * res, q.y * res};
  };
  std::vector<std::pair<Point, Point>> segments;
  for (const auto& stroke : layout) {
    for (std::size_t i = 0; i + 1 < stroke.size(); ++i) {
      segments.emplace_back(to_pixels(stroke[i]), to_pixels(stroke[i + 1]));
    }
    if (style.serif && stroke.size() == 2) {
      // Short cross bars at both ends of straight strokes.
      for (const Point end : {stroke.front(), stroke.back()}) {
        const Point e = to_pixels(end);
        const double half = 1.6 * style.thickness;
        segments.emplace_back(Point{e.x - half, e.y}, Point{e.x + half, e.y});
      }
    }
  }
  std::vector<double> img(static_cast<std::size_t>(res) * res);
  const double radius = style.thickness / 2.0;
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      const Point p{x + 0.5, y + 0.5};
      double d = 1e9;
      for (const auto& [a, b] : segments) d = std::min(d, segment_distance(p, a, b));
      const double coverage = std::clamp(radius + 0.5 - d, 0.0, 1.0);
      img[static_cast<std::size_t>(y) * res + x] = 2.0 * coverage - 1.0;
    }
  }
  return img;
}

std::string numbered(char prefix, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%03zu", prefix, i);
  return buf;
}

}  // namespace

SynthStyle synth_style(const SynthConfig& cfg, Id style) {
  Rng rng = Rng(cfg.seed, 0x2000).split(static_cast<std::uint64_t>(style));
  SynthStyle s;
  s.thickness = rng.uniform(cfg.thickness_min, cfg.thickness_max);
  s.slant_deg = rng.uniform(cfg.slant_min_deg, cfg.slant_max_deg);
  s.scale = rng.uniform(cfg.scale_min, cfg.scale_max);
  s.serif = rng.uniform() < cfg.serif_probability;
  return s;
}

GlyphDataset synth_dataset(const SynthConfig& cfg) {
  cfg.validate();
  Manifest manifest;
  for (int i = 0; i < cfg.n_styles; ++i) manifest.style_labels.push_back(numbered('s', i));
  for (int j = 0; j < cfg.n_contents; ++j) manifest.content_labels.push_back(numbered('c', j));
  GlyphDataset ds(cfg.resolution, manifest);
  std::vector<std::vector<Polyline>> layouts;
  for (int j = 0; j < cfg.n_contents; ++j) layouts.push_back(content_layout(cfg, j));
  for (int i = 0; i < cfg.n_styles; ++i) {
    const SynthStyle style = synth_style(cfg, i);
    for (int j = 0; j < cfg.n_contents; ++j) {
      ds.add({i, j}, render(layouts[j], style, cfg.resolution));
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Ingestion.

namespace {

bool is_image_file(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".pgm";
}

}  // namespace

GlyphDataset ingest_images(const std::filesystem::path& root, std::vector<std::string>* warnings) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw DataError("dataset root is not a directory: " + root.string());

  std::map<std::string, std::map<std::string, fs::path>> files;  // style -> content -> path
  std::vector<fs::path> style_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) style_dirs.push_back(entry.path());
  }
  std::sort(style_dirs.begin(), style_dirs.end());
  for (const auto& dir : style_dirs) {
    std::map<std::string, fs::path> glyphs;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file() || !is_image_file(entry.path())) continue;
      const std::string label = entry.path().stem().string();
      if (glyphs.count(label)) {
        throw DataError("duplicate content label '" + label + "' in " + dir.string());
      }
      glyphs[label] = entry.path();
    }
    if (glyphs.empty()) {
      if (warnings) warnings->push_back("skipping empty style directory " + dir.string());
      continue;
    }
    files[dir.filename().string()] = std::move(glyphs);
  }
  if (files.empty()) throw DataError("no glyph images under " + root.string());

  Manifest manifest;
  std::set<std::string> contents;
  for (const auto& [style, glyphs] : files) {
    manifest.style_labels.push_back(style);
    for (const auto& [content, path] : glyphs) contents.insert(content);
  }
  manifest.content_labels.assign(contents.begin(), contents.end());

  std::map<std::string, GrayImage> images;
  std::map<std::pair<int, int>, std::vector<std::string>> by_size;
  std::vector<std::string> non_square;
  for (const auto& [style, glyphs] : files) {
    for (const auto& [content, path] : glyphs) {
      GrayImage img = read_gray_image(path);
      if (img.width != img.height) non_square.push_back(path.string());
      by_size[{img.width, img.height}].push_back(path.string());
      images[path.string()] = std::move(img);
    }
  }
  if (!non_square.empty() || by_size.size() > 1) {
    std::ostringstream os;
    os << "ingestion failed:";
    for (const auto& p : non_square) os << "\n  non-square: " << p;
    if (by_size.size() > 1) {
      // Report everything outside the most common size.
      auto majority = std::max_element(by_size.begin(), by_size.end(), [](const auto& a, const auto& b) {
        return a.second.size() < b.second.size();
      });
      for (const auto& [size, paths] : by_size) {
        if (size == majority->first) continue;
        for (const auto& p : paths) {
          os << "\n  resolution " << size.first << "x" << size.second << " (expected "
             << majority->first.first << "x" << majority->first.second << "): " << p;
        }
      }
    }
    throw DataError(os.str());
  }

  const int resolution = by_size.begin()->first.first;
  GlyphDataset ds(resolution, manifest);
  for (std::size_t s = 0; s < manifest.style_labels.size(); ++s) {
    for (const auto& [content, path] : files[manifest.style_labels[s]]) {
      const auto c = std::lower_bound(manifest.content_labels.begin(), manifest.content_labels.end(), content) -
                     manifest.content_labels.begin();
      ds.add({static_cast<Id>(s), static_cast<Id>(c)}, to_signed_unit(images[path.string()].pixels));
    }
  }
  return ds;
}

void write_dataset_images(const GlyphDataset& ds, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  fs::create_directories(root);
  const auto& m = ds.manifest();
  for (const auto& key : ds.cells()) {
    const fs::path dir = root / m.style_labels[static_cast<std::size_t>(key.style)];
    fs::create_directories(dir);
    GrayImage img;
    img.width = img.height = ds.resolution();
    img.pixels = to_bytes(ds.image(key));
    write_png(dir / (m.content_labels[static_cast<std::size_t>(key.content)] + ".png"), img);
  }
  std::ofstream out(root / "manifest.csv");
  write_manifest_csv(m, out);
}

}  // namespace cocoaan
