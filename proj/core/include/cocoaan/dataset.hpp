// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cocoaan/feature_store.hpp"
#include "cocoaan/tensor.hpp"

namespace cocoaan {

/// One glyph cell: font (style) id and character (content) id.
struct CellKey {
  Id style = 0;
  Id content = 0;

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

/// Id <-> human label tables; the id is the index.
struct Manifest {
  std::vector<std::string> style_labels;
  std::vector<std::string> content_labels;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// CSV `role,id,label` with a header row.
void write_manifest_csv(const Manifest& manifest, std::ostream& out);
Manifest read_manifest_csv(std::istream& in);

/// Grayscale glyphs in [-1, 1] keyed by (style, content). The grid may be sparse.
class GlyphDataset {
 public:
  GlyphDataset() = default;
  GlyphDataset(int resolution, Manifest manifest);

  int resolution() const { return resolution_; }
  const Manifest& manifest() const { return manifest_; }

  /// Throws DataError for wrong size or pixels outside [-1, 1].
  void add(CellKey key, std::vector<double> pixels);

  bool contains(CellKey key) const { return index_.count(key) != 0; }
  std::span<const double> image(CellKey key) const;
  /// Present cells in sorted order.
  const std::vector<CellKey>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  /// Ids with at least one image, sorted.
  std::vector<Id> style_ids() const;
  std::vector<Id> content_ids() const;

  /// Stacked [n, 1, R, R] batch.
  Tensor batch(std::span<const CellKey> keys) const;

  /// Keeps only cells whose style is in `styles`; ids and manifest unchanged.
  GlyphDataset filter_styles(const std::set<Id>& styles) const;

  friend bool operator==(const GlyphDataset& a, const GlyphDataset& b) {
    return a.resolution_ == b.resolution_ && a.manifest_ == b.manifest_ && a.cells_ == b.cells_ &&
           a.images_ == b.images_;
  }

 private:
  int resolution_ = 0;
  Manifest manifest_;
  std::vector<CellKey> cells_;
  std::vector<std::vector<double>> images_;  // parallel to cells_
  std::map<CellKey, std::size_t> index_;
};

/// Procedural test bed with a known factorization: a content fixes a stroke
/// layout, a style fixes the rendering of every layout.
struct SynthConfig {
  int n_styles = 10;
  int n_contents = 20;
  int resolution = 32;
  std::uint64_t seed = 1;
  double thickness_min = 1.2;  // px at the configured resolution
  double thickness_max = 3.4;
  double slant_min_deg = -18.0;
  double slant_max_deg = 18.0;
  double scale_min = 0.7;
  double scale_max = 1.0;
  double serif_probability = 0.5;

  void validate() const;
};

/// Rendering parameters of one synthetic style.
struct SynthStyle {
  double thickness = 0.0;
  double slant_deg = 0.0;
  double scale = 1.0;
  bool serif = false;
};

SynthStyle synth_style(const SynthConfig& cfg, Id style);

/// Deterministic in cfg. Labels are "s000"... and "c000"...
GlyphDataset synth_dataset(const SynthConfig& cfg);

/// Reads `<root>/<style_label>/<content_label>.{png,pgm}`; ids follow sorted
/// label order. Empty style directories are skipped with a warning; non-square
/// or mixed-resolution images raise DataError naming every offender.
GlyphDataset ingest_images(const std::filesystem::path& root,
                           std::vector<std::string>* warnings = nullptr);

/// Writes the dataset back out in the ingestion layout, plus manifest.csv.
void write_dataset_images(const GlyphDataset& ds, const std::filesystem::path& root);

}  // namespace cocoaan
