// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "cocoaan/dataset.hpp"
#include "cocoaan/networks.hpp"

namespace cocoaan {

inline constexpr int kConfigVersion = 1;

/// Optimisation and run settings. Defaults are the reference hyperparameters
/// with a CPU-sized batch.
struct TrainConfig {
  NetScale scale;
  double lr_s = 0.0001;
  double lr_c = 0.0001;
  double lr_g = 0.0002;
  double lr_d = 0.0004;
  double beta1 = 0.0;
  double beta2 = 0.9;
  double lambda = 10.0;
  int batch_size = 32;
  std::int64_t iterations = 2000;
  std::uint64_t seed = 0;
  /// 0 disables periodic checkpoints.
  std::int64_t checkpoint_every = 0;
  /// -log sigmoid(fake) generator loss instead of the saturating form.
  bool non_saturating = false;
  /// Generator phase steps S, C, D instead of S, C, G.
  bool generator_phase_updates_d = false;
  /// Global gradient-norm clip per Adam step; 0 disables.
  double clip_norm = 0.0;
  /// f32 lowers the convolution GEMMs; determinism holds either way.
  Precision precision = Precision::f64;

  /// Throws ConfigError.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Flat `key = value` document. Blank lines and `#` comments are ignored.
using ConfigMap = std::map<std::string, std::string>;

/// Throws ConfigError on malformed lines or duplicate keys.
ConfigMap parse_config(std::istream& in);
ConfigMap parse_config_text(const std::string& text);
ConfigMap read_config_file(const std::string& path);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

std::string to_string(Precision p);
Precision parse_precision(const std::string& text);

/// Applies the keys this struct owns and erases them from `map`. Values that
/// fail to parse raise ConfigError naming the key. A `config_version` other
/// than kConfigVersion is rejected.
void apply_config(ConfigMap& map, TrainConfig& cfg);
void apply_config(ConfigMap& map, SynthConfig& cfg);

/// Throws ConfigError listing any keys left over after apply_config.
void reject_unknown_keys(const ConfigMap& map);

/// `key = value` lines starting with `config_version = 1`, in a fixed order.
std::string serialize_config(const TrainConfig& cfg);
std::string serialize_config(const SynthConfig& cfg);

}  // namespace cocoaan
