// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "cocoaan/objectives.hpp"

#include <cmath>

#include "cocoaan/errors.hpp"
#include "cocoaan/ops.hpp"

namespace cocoaan {
namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericError(std::string(what) + " is not finite");
}

}  // namespace

LossBundle disc_step_loss(const Tensor& real_logits, const Tensor& fake_logits) {
  if (real_logits.shape() != fake_logits.shape()) {
    throw ShapeError("disc_step_loss: real logits " + shape_str(real_logits.shape()) +
                     " vs fake logits " + shape_str(fake_logits.shape()));
  }
  // log(1 - sigmoid(x)) == log sigmoid(-x)
  Tensor value = mean(log_sigmoid(real_logits)) + mean(log_sigmoid(scale(fake_logits, -1.0)));
  LossBundle out;
  out.adv_term = value.item();
  require_finite(out.adv_term, "discriminator loss");
  out.total = std::move(value);
  return out;
}

LossBundle gen_step_loss(const Tensor& fake_logits, const Tensor& x_fake, const Tensor& x_real,
                         const GeneratorLossOptions& options) {
  if (x_fake.shape() != x_real.shape()) {
    throw ShapeError("gen_step_loss: generated " + shape_str(x_fake.shape()) + " vs real " +
                     shape_str(x_real.shape()));
  }
  if (fake_logits.dim() != 1 || fake_logits.size(0) != x_fake.size(0)) {
    throw ShapeError("gen_step_loss: logits " + shape_str(fake_logits.shape()) +
                     " do not match batch " + shape_str(x_fake.shape()));
  }
  Tensor adv = options.non_saturating ? scale(mean(log_sigmoid(fake_logits)), -1.0)
                                      : mean(log_sigmoid(scale(fake_logits, -1.0)));
  const Tensor l1 = mean(abs(x_fake - x_real));
  LossBundle out;
  out.adv_term = adv.item();
  out.l1_term = l1.item();
  require_finite(out.adv_term, "generator adversarial loss");
  require_finite(out.l1_term, "L1 reconstruction term");
  out.total = options.lambda == 0.0 ? adv : adv + scale(l1, options.lambda);
  return out;
}

double mean_l1(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("mean_l1: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const auto x = a.data();
  const auto y = b.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::fabs(x[i] - y[i]);
  return acc / static_cast<double>(x.size());
}

}  // namespace cocoaan
