// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cocoaan/tensor.hpp"

namespace cocoaan {

inline constexpr double kAdamEpsilon = 1e-8;

struct AdamHyper {
  double lr = 1e-4;
  double beta1 = 0.0;
  double beta2 = 0.9;
  double eps = kAdamEpsilon;
};

/// Moments mirror the parameter list they were created for.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::int64_t t = 0;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

AdamState make_adam_state(std::span<const Tensor> params);

/// Bias-corrected Adam descent on each parameter's accumulated gradient
/// (missing gradients count as zero), then clears the gradients. Throws
/// NumericError naming the first non-finite gradient; nothing is modified
/// in that case. `group` labels the diagnostics.
void adam_step(std::span<Tensor> params, AdamState& state, const AdamHyper& hyper,
               const std::string& group = "params");

/// L2 norm over every gradient in `params`.
double global_grad_norm(std::span<const Tensor> params);

/// Rescales gradients so their global norm is at most `max_norm`. Returns the
/// norm before clipping.
double clip_grad_norm(std::span<Tensor> params, double max_norm);

}  // namespace cocoaan
