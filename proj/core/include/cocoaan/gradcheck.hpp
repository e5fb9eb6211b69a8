// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "cocoaan/tensor.hpp"

namespace cocoaan {

struct GradCheckOptions {
  double eps = 1e-5;
  /// Coordinates probed per tensor; 0 probes all of them, otherwise a seeded
  /// random subset of this size.
  std::int64_t max_coords_per_tensor = 0;
  std::uint64_t seed = 0;
};

using TensorFunction = std::function<Tensor(std::span<const Tensor>)>;

/// Max over probed coordinates of |analytic - central difference| / max(1, |analytic|).
/// `f` must be deterministic and return a scalar. Inputs are copied; the
/// originals are not modified.
double finite_diff_check(const TensorFunction& f, std::span<const Tensor> inputs,
                         const GradCheckOptions& options = {});

/// Same measure for a closure over existing leaves (e.g. network parameters).
/// The leaves are perturbed in place and restored; their accumulated grads
/// are cleared on entry.
double finite_diff_check_leaves(const std::function<Tensor()>& loss, std::span<Tensor> leaves,
                                const GradCheckOptions& options = {});

}  // namespace cocoaan
