// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cocoaan/trainer.hpp"

namespace cocoaan {

struct EvalRow {
  CellKey key;
  double l1 = 0.0;
  std::string image_path;  // empty when no images were written
};

struct EvalReport {
  std::vector<EvalRow> rows;
  double mean_l1 = 0.0;
  double median_l1 = 0.0;
};

/// Recomputes mean and median from the rows.
void summarize(EvalReport& report);
void write_report_csv(const EvalReport& report, std::ostream& out);

/// Eval-mode generation from code batches [n, code_dim].
Tensor generate(const TrainState& state, const Tensor& s, const Tensor& c);

/// Generates G(Z_s[i], Z_c[j]) for every key, scores per-pixel mean L1
/// against the dataset image, and writes PNGs under `image_dir` when it is
/// non-empty. Throws StoreMissError listing every uncovered key.
EvalReport reconstruct(const TrainState& state, const GlyphDataset& ds,
                       std::span<const CellKey> keys,
                       const std::filesystem::path& image_dir = {});

/// Mean over the batch of S(images[k], Z_c[content_keys[k]]).
std::vector<double> learn_new_style(const TrainState& state, const Tensor& images,
                                    std::span<const Id> content_keys);

/// For each distinct entry of `new_content_ids`, the mean of
/// C(images[k], Z_s[style_keys[k]]) over that content's rows.
std::map<Id, std::vector<double>> learn_new_content(const TrainState& state,
                                                    const Tensor& images,
                                                    std::span<const Id> style_keys,
                                                    std::span<const Id> new_content_ids);

/// Frames G((1 - t) s_a + t s_b, c) for t = k / (steps - 1), as [steps, 1, R, R].
Tensor interpolate_style(const TrainState& state, std::span<const double> s_a,
                         std::span<const double> s_b, std::span<const double> c, int steps);

/// Store CSV; throws DataError when the store is empty.
void export_embeddings(const TrainState& state, StoreRole role, const std::filesystem::path& out);

/// Writes image `index` of a [n, 1, R, R] batch as an 8-bit PNG.
void write_batch_png(const Tensor& batch, std::int64_t index, const std::filesystem::path& path);

}  // namespace cocoaan
