// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "cocoaan/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "cocoaan/errors.hpp"
#include "cocoaan/image_io.hpp"

namespace cocoaan {
namespace {

Tensor code_batch(const std::vector<const std::vector<double>*>& codes, int code_dim) {
  std::vector<double> data;
  data.reserve(codes.size() * static_cast<std::size_t>(code_dim));
  for (const auto* c : codes) data.insert(data.end(), c->begin(), c->end());
  return Tensor({static_cast<std::int64_t>(codes.size()), code_dim}, std::move(data));
}

Tensor lookup(const FeatureStore& store, std::span<const Id> keys, const char* what) {
  std::vector<const std::vector<double>*> rows;
  std::string missing;
  for (Id k : keys) {
    if (!store.contains(k)) {
      missing += (missing.empty() ? "" : ", ") + std::to_string(k);
      continue;
    }
    rows.push_back(&store.at(k));
  }
  if (!missing.empty()) throw StoreMissError(std::string(what) + " not in store: " + missing);
  return code_batch(rows, store.code_dim());
}

void check_images(const TrainState& st, const Tensor& images, std::size_t n_keys) {
  const std::int64_t r = st.config.scale.resolution;
  if (images.dim() != 4 || images.size(1) != 1 || images.size(2) != r || images.size(3) != r) {
    throw ShapeError("expected images [n,1," + std::to_string(r) + "," + std::to_string(r) +
                     "], got " + shape_str(images.shape()));
  }
  if (static_cast<std::size_t>(images.size(0)) != n_keys || n_keys == 0) {
    throw ShapeError("image count " + std::to_string(images.size(0)) + " does not match " +
                     std::to_string(n_keys) + " keys");
  }
}

Tensor extract(const EncoderParams& net, const Tensor& images, const Tensor& cond) {
  return encoder_forward(net, images, cond, ForwardOptions::inference());
}

}  // namespace

void summarize(EvalReport& report) {
  if (report.rows.empty()) {
    report.mean_l1 = report.median_l1 = 0.0;
    return;
  }
  std::vector<double> v;
  double sum = 0.0;
  for (const auto& r : report.rows) {
    v.push_back(r.l1);
    sum += r.l1;
  }
  report.mean_l1 = sum / static_cast<double>(v.size());
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  report.median_l1 = v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
  out << "style_id,content_id,l1,image\n";
  char buf[64];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.l1);
    out << r.key.style << ',' << r.key.content << ',' << buf << ',' << r.image_path << '\n';
  }
}

Tensor generate(const TrainState& state, const Tensor& s, const Tensor& c) {
  return generator_forward(state.nets.g, s, c, ForwardOptions::inference());
}

void write_batch_png(const Tensor& batch, std::int64_t index, const std::filesystem::path& path) {
  const std::int64_t h = batch.size(2);
  const std::int64_t w = batch.size(3);
  const auto plane = batch.data().subspan(static_cast<std::size_t>(index * h * w),
                                          static_cast<std::size_t>(h * w));
  GrayImage img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.pixels = to_bytes(plane);
  write_png(path, img);
}

EvalReport reconstruct(const TrainState& state, const GlyphDataset& ds,
                       std::span<const CellKey> keys, const std::filesystem::path& image_dir) {
  if (keys.empty()) return {};
  std::vector<Id> styles, contents;
  std::string missing;
  for (const auto& k : keys) {
    if (!state.z_s.contains(k.style) || !state.z_c.contains(k.content)) {
      missing += (missing.empty() ? "" : " ") + std::string("(") + std::to_string(k.style) + "," +
                 std::to_string(k.content) + ")";
    }
    styles.push_back(k.style);
    contents.push_back(k.content);
  }
  if (!missing.empty()) throw StoreMissError("uncovered keys: " + missing);

  const Tensor fake = generate(state, lookup(state.z_s, styles, "styles"),
                               lookup(state.z_c, contents, "contents"));
  const Tensor real = ds.batch(keys);
  const auto plane = static_cast<std::size_t>(ds.resolution()) * ds.resolution();
  if (!image_dir.empty()) std::filesystem::create_directories(image_dir);

  EvalReport report;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    double acc = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
      acc += std::fabs(fake.data()[k * plane + p] - real.data()[k * plane + p]);
    }
    EvalRow row{keys[k], acc / static_cast<double>(plane), {}};
    if (!image_dir.empty()) {
      const auto& m = ds.manifest();
      const auto path = image_dir / (m.style_labels.at(static_cast<std::size_t>(keys[k].style)) +
                                     "_" +
                                     m.content_labels.at(static_cast<std::size_t>(keys[k].content)) +
                                     ".png");
      write_batch_png(fake, static_cast<std::int64_t>(k), path);
      row.image_path = path.string();
    }
    report.rows.push_back(std::move(row));
  }
  summarize(report);
  return report;
}

std::vector<double> learn_new_style(const TrainState& state, const Tensor& images,
                                    std::span<const Id> content_keys) {
  check_images(state, images, content_keys.size());
  const Tensor codes =
      extract(state.nets.s, images, lookup(state.z_c, content_keys, "content keys"));
  const auto d = static_cast<std::size_t>(state.config.scale.code_dim);
  std::vector<double> mean(d, 0.0);
  for (std::size_t k = 0; k < content_keys.size(); ++k) {
    for (std::size_t i = 0; i < d; ++i) mean[i] += codes.data()[k * d + i];
  }
  for (double& x : mean) x /= static_cast<double>(content_keys.size());
  return mean;
}

std::map<Id, std::vector<double>> learn_new_content(const TrainState& state,
                                                    const Tensor& images,
                                                    std::span<const Id> style_keys,
                                                    std::span<const Id> new_content_ids) {
  if (style_keys.size() != new_content_ids.size()) {
    throw ShapeError("learn_new_content: style keys and content ids differ in length");
  }
  check_images(state, images, style_keys.size());
  const Tensor codes = extract(state.nets.c, images, lookup(state.z_s, style_keys, "style keys"));
  // Group means via a scratch store keeps the averaging identical to training.
  FeatureStore scratch(StoreRole::content, state.config.scale.code_dim);
  update_store(scratch, new_content_ids, codes);
  return scratch.entries();
}

Tensor interpolate_style(const TrainState& state, std::span<const double> s_a,
                         std::span<const double> s_b, std::span<const double> c, int steps) {
  const auto d = static_cast<std::size_t>(state.config.scale.code_dim);
  if (steps < 2) throw ConfigError("interpolate_style: steps must be >= 2");
  if (s_a.size() != d || s_b.size() != d || c.size() != d) {
    throw ShapeError("interpolate_style: codes must have length " + std::to_string(d));
  }
  std::vector<double> s_rows, c_rows;
  for (int k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) / (steps - 1);
    for (std::size_t i = 0; i < d; ++i) s_rows.push_back((1.0 - t) * s_a[i] + t * s_b[i]);
    c_rows.insert(c_rows.end(), c.begin(), c.end());
  }
  const auto dim = static_cast<std::int64_t>(d);
  return generate(state, Tensor({steps, dim}, std::move(s_rows)), Tensor({steps, dim}, std::move(c_rows)));
}

void export_embeddings(const TrainState& state, StoreRole role, const std::filesystem::path& out) {
  const FeatureStore& store = role == StoreRole::style ? state.z_s : state.z_c;
  if (store.empty()) throw DataError("empty export: the " + to_string(role) + " store has no entries");
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + out.string());
  write_store_csv(store, f);
}

}  // namespace cocoaan
