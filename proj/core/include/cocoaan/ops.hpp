// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "cocoaan/tensor.hpp"

namespace cocoaan {

// Elementwise; operands must have identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double value);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }

Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor abs(const Tensor& a);
/// log(sigmoid(x)) without overflow for any finite x.
Tensor log_sigmoid(const Tensor& a);

/// Reductions to a [1] tensor.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

Tensor reshape(const Tensor& a, Shape shape);
/// Concatenation along `axis`; all other dims must agree.
Tensor concat(std::span<const Tensor> parts, std::int64_t axis);
/// Slice [start, start + length) along `axis`.
Tensor narrow(const Tensor& a, std::int64_t axis, std::int64_t start, std::int64_t length);

/// y[B,C] = x[B,D] * w[C,D]^T + bias[C]. `bias` may be undefined.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// y[b,c,h,w] = x[b,c,h,w] + offsets[b,c].
Tensor add_channelwise(const Tensor& x, const Tensor& offsets);

/// Cross-correlation. x [B,C,H,W], weight [O,C,k,k], bias [O] or undefined.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride, int padding,
              Precision precision = Precision::f64);

/// Transposed convolution, the adjoint of conv2d in x: weight is laid out
/// [C_in, C_out, k, k] and the output side is (H - 1) * stride - 2 * padding + k.
Tensor conv_transpose2d(const Tensor& x, const Tensor& weight, const Tensor& bias, int stride,
                        int padding, Precision precision = Precision::f64);

struct BatchMoments {
  std::vector<double> mean;
  std::vector<double> var;  // biased
};

/// Per-channel normalization with batch statistics over (B, H, W). Writes the
/// moments used to `moments` when non-null.
Tensor batch_norm_train(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps,
                        BatchMoments* moments = nullptr);

/// Normalization with fixed statistics; differentiable in x, gamma, beta.
Tensor batch_norm_eval(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                       std::span<const double> mean, std::span<const double> var, double eps);

/// weight / (u^T W v), where W is weight viewed as [shape[0], rest] and u, v
/// are held constant. Gradient flows to weight through both numerator and
/// the estimated spectral norm.
Tensor spectral_divide(const Tensor& weight, std::span<const double> u, std::span<const double> v);

}  // namespace cocoaan
