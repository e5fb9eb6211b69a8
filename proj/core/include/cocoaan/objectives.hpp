// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "cocoaan/tensor.hpp"

namespace cocoaan {

inline constexpr double kDefaultL1Weight = 10.0;

/// Scalar pieces of one phase's objective. For the discriminator side
/// `total == adv_term` and `l1_term == 0`; for the generator side
/// `total == adv_term + lambda * l1_term`.
struct LossBundle {
  Tensor total;
  double adv_term = 0.0;
  double l1_term = 0.0;
};

/// Discriminator objective to ascend:
///   mean(log sigmoid(real)) + mean(log(1 - sigmoid(fake))).
/// `total` carries this value; callers descending should negate it.
LossBundle disc_step_loss(const Tensor& real_logits, const Tensor& fake_logits);

struct GeneratorLossOptions {
  double lambda = kDefaultL1Weight;
  /// Use -log sigmoid(fake) instead of log(1 - sigmoid(fake)).
  bool non_saturating = false;
};

/// Generator objective to descend:
///   mean(log(1 - sigmoid(fake))) + lambda * mean|x_fake - x_real|,
/// with the L1 mean taken over batch and pixels.
LossBundle gen_step_loss(const Tensor& fake_logits, const Tensor& x_fake, const Tensor& x_real,
                         const GeneratorLossOptions& options = {});

/// Mean absolute pixel difference; the reconstruction score used in evaluation.
double mean_l1(const Tensor& a, const Tensor& b);

}  // namespace cocoaan
