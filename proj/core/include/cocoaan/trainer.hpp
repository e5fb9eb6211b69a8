// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "cocoaan/adam.hpp"
#include "cocoaan/config.hpp"
#include "cocoaan/dataset.hpp"
#include "cocoaan/feature_store.hpp"
#include "cocoaan/networks.hpp"
#include "cocoaan/rng.hpp"

namespace cocoaan {

struct Networks {
  GeneratorParams g;
  EncoderParams s;  // style encoder, conditioned on a content code
  EncoderParams c;  // content encoder, conditioned on a style code
  DiscriminatorParams d;
};

/// Each network gets its own seed derived from `seed`.
Networks build_networks(const NetScale& scale, std::uint64_t seed);

struct MetricRow {
  std::int64_t iteration = 0;
  double loss_d = 0.0;      // -(discriminator value), i.e. the descended quantity
  double loss_g_adv = 0.0;  // adversarial part of the generator objective
  double loss_l1 = 0.0;     // mean |x' - x| before lambda
  std::int64_t cov_s = 0;
  std::int64_t cov_c = 0;
  double wall_ms = 0.0;
};

inline constexpr std::size_t kMetricHistory = 256;

struct TrainState {
  TrainConfig config;
  Manifest manifest;
  Networks nets;
  AdamState adam_s;
  AdamState adam_c;
  AdamState adam_g;
  AdamState adam_d;
  FeatureStore z_s;
  FeatureStore z_c;
  std::int64_t iteration = 0;
  RngState rng;
  /// Most recent rows; not part of checkpoints.
  std::deque<MetricRow> recent;
};

/// Fresh networks, zeroed optimiser moments, empty stores.
TrainState init_train_state(const TrainConfig& cfg, const Manifest& manifest);

/// Per-phase observations for tests; all hashes are parameter_hash values
/// taken immediately before and after the named phase.
struct IterationProbe {
  std::uint64_t g_before_disc = 0, g_after_disc = 0;
  std::uint64_t d_before_gen = 0, d_after_gen = 0;
  /// Known-code batches of both training selections.
  std::vector<Tensor> disc_knowns;
  std::vector<Tensor> gen_knowns;
};

/// One full iteration: discriminator phase, store refresh, generator phase,
/// store refresh. Throws NumericError on a non-finite loss or gradient.
MetricRow train_iteration(TrainState& state, const GlyphDataset& ds,
                          IterationProbe* probe = nullptr);

struct TrainRunOptions {
  /// Periodic checkpoints go to <dir>/ckpt_<iteration>.bin and <dir>/latest.bin.
  std::filesystem::path checkpoint_dir;
  /// Metrics CSV sink; the header is written when `write_header` is set.
  std::ostream* metrics = nullptr;
  bool write_header = true;
  std::function<void(const MetricRow&)> on_iteration;
};

/// Runs until state.iteration == state.config.iterations. On numeric failure
/// rethrows NumericError naming the last checkpoint written, if any.
std::vector<MetricRow> train(TrainState& state, const GlyphDataset& ds,
                             const TrainRunOptions& options = {});

inline constexpr const char* kMetricsHeader =
    "iteration,loss_d,loss_g_adv,loss_l1,cov_s,cov_c,wall_ms";

/// One CSV row; wall_ms is omitted when `with_wall_time` is false so that
/// logs of identical runs compare equal.
std::string format_metric_row(const MetricRow& row, bool with_wall_time = true);

}  // namespace cocoaan
