// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace cocoaan {

/// Serializable generator state.
struct RngState {
  std::uint64_t key = 0;
  std::uint64_t counter = 0;

  friend bool operator==(const RngState&, const RngState&) = default;
};

/// Counter-based generator: the n-th draw is a pure function of (key, n), so
/// streams are reproducible bit-for-bit on every platform and cheap to split.
/// Distribution transforms are implemented here rather than with <random>
/// distributions, whose outputs differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  static Rng from_state(RngState state);
  RngState state() const { return {key_, counter_}; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; consumes exactly two draws.
  double normal();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Independent child generator; does not advance this one.
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace cocoaan
