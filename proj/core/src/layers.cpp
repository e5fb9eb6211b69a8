// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "cocoaan/layers.hpp"

#include <cmath>

#include "cocoaan/errors.hpp"

namespace cocoaan {
namespace {

double normalize_in_place(std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (!(n > 1e-12)) throw NumericError("spectral_normalize: power iteration collapsed (zero weight)");
  for (double& x : v) x /= n;
  return n;
}

Tensor maybe_detach(const Tensor& t, const ForwardOptions& options) {
  if (!t.defined()) return t;
  return options.track_params ? t : t.detach();
}

}  // namespace

SpectralState make_spectral_state(std::int64_t rows, Rng& rng, int n_power_iterations) {
  SpectralState s;
  s.n_power_iterations = n_power_iterations;
  s.u.resize(static_cast<std::size_t>(rows));
  for (double& x : s.u) x = rng.normal();
  normalize_in_place(s.u);
  return s;
}

SpectralResult spectral_normalize(const Tensor& w, const SpectralState& s) {
  const std::int64_t rows = w.size(0);
  const std::int64_t cols = w.numel() / rows;
  if (static_cast<std::int64_t>(s.u.size()) != rows) {
    throw ShapeError("spectral_normalize: u has length " + std::to_string(s.u.size()) +
                     " for weight " + shape_str(w.shape()));
  }
  const auto wd = w.data();
  SpectralResult result;
  result.state = s;
  auto& u = result.state.u;
  std::vector<double> v(static_cast<std::size_t>(cols));

  auto update_v = [&] {
    std::fill(v.begin(), v.end(), 0.0);
    for (std::int64_t r = 0; r < rows; ++r)
      for (std::int64_t c = 0; c < cols; ++c) v[c] += wd[r * cols + c] * u[r];
    normalize_in_place(v);
  };
  auto update_u = [&] {
    for (std::int64_t r = 0; r < rows; ++r) {
      double acc = 0.0;
      for (std::int64_t c = 0; c < cols; ++c) acc += wd[r * cols + c] * v[c];
      u[r] = acc;
    }
    normalize_in_place(u);
  };

  if (s.n_power_iterations <= 0) {
    update_v();
  } else {
    for (int i = 0; i < s.n_power_iterations; ++i) {
      update_v();
      update_u();
    }
  }
  double sigma = 0.0;
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = 0; c < cols; ++c) sigma += u[r] * wd[r * cols + c] * v[c];
  result.sigma = sigma;
  result.weight = spectral_divide(w, u, v);
  return result;
}

BatchNormParams make_batch_norm(std::int64_t channels) {
  BatchNormParams p;
  p.gamma = Tensor::full({channels}, 1.0).set_requires_grad(true);
  p.beta = Tensor::zeros({channels}).set_requires_grad(true);
  p.running_mean.assign(static_cast<std::size_t>(channels), 0.0);
  p.running_var.assign(static_cast<std::size_t>(channels), 1.0);
  return p;
}

Tensor effective_weight(const Tensor& weight, const std::optional<SpectralState>& spectral,
                        const ForwardOptions& options, std::optional<SpectralState>* state_out) {
  const Tensor w = maybe_detach(weight, options);
  if (!spectral) return w;
  SpectralState s = *spectral;
  if (!options.update_state) s.n_power_iterations = 0;
  auto r = spectral_normalize(w, s);
  if (state_out && options.update_state) {
    r.state.n_power_iterations = spectral->n_power_iterations;
    *state_out = std::move(r.state);
  }
  return r.weight;
}

Tensor conv2d(const Tensor& x, ConvParams& p, const ForwardOptions& options) {
  const Tensor w = effective_weight(p.weight, p.spectral, options, &p.spectral);
  return conv2d(x, w, maybe_detach(p.bias, options), p.stride, p.padding, options.precision);
}

Tensor conv2d(const Tensor& x, const ConvParams& p, const ForwardOptions& options) {
  const Tensor w = effective_weight(p.weight, p.spectral, options, nullptr);
  return conv2d(x, w, maybe_detach(p.bias, options), p.stride, p.padding, options.precision);
}

Tensor deconv2d(const Tensor& x, const ConvParams& p, const ForwardOptions& options) {
  const Tensor w = effective_weight(p.weight, p.spectral, options, nullptr);
  return conv_transpose2d(x, w, maybe_detach(p.bias, options), p.stride, p.padding,
                          options.precision);
}

Tensor batch_norm(const Tensor& x, BatchNormParams& p, const ForwardOptions& options) {
  if (!options.train) return batch_norm(x, static_cast<const BatchNormParams&>(p), options);
  BatchMoments m;
  Tensor y = batch_norm_train(x, maybe_detach(p.gamma, options), maybe_detach(p.beta, options),
                              kBatchNormEps, &m);
  if (options.update_state) {
    for (std::size_t c = 0; c < m.mean.size(); ++c) {
      p.running_mean[c] = kBatchNormMomentum * p.running_mean[c] + (1.0 - kBatchNormMomentum) * m.mean[c];
      p.running_var[c] = kBatchNormMomentum * p.running_var[c] + (1.0 - kBatchNormMomentum) * m.var[c];
    }
  }
  return y;
}

Tensor batch_norm(const Tensor& x, const BatchNormParams& p, const ForwardOptions& options) {
  if (options.train) {
    return batch_norm_train(x, maybe_detach(p.gamma, options), maybe_detach(p.beta, options),
                            kBatchNormEps);
  }
  return batch_norm_eval(x, maybe_detach(p.gamma, options), maybe_detach(p.beta, options),
                         p.running_mean, p.running_var, kBatchNormEps);
}

namespace {

Tensor fc_add_impl(const Tensor& x, const Tensor& cond, const FcAddParams& p,
                   const ForwardOptions& options, std::optional<SpectralState>* state_out) {
  if (x.dim() != 4 || cond.dim() != 2 || cond.size(0) != x.size(0)) {
    throw ShapeError("fc_add: input " + shape_str(x.shape()) + " with condition " +
                     shape_str(cond.shape()));
  }
  if (p.weight.size(0) != x.size(1) || p.weight.size(1) != cond.size(1)) {
    throw ShapeError("fc_add: weight " + shape_str(p.weight.shape()) + " for input " +
                     shape_str(x.shape()) + " and condition " + shape_str(cond.shape()));
  }
  const Tensor w = effective_weight(p.weight, p.spectral, options, state_out);
  return add_channelwise(x, linear(cond, w, maybe_detach(p.bias, options)));
}

}  // namespace

Tensor fc_add(const Tensor& x, const Tensor& cond, FcAddParams& p, const ForwardOptions& options) {
  return fc_add_impl(x, cond, p, options, &p.spectral);
}

Tensor fc_add(const Tensor& x, const Tensor& cond, const FcAddParams& p,
              const ForwardOptions& options) {
  return fc_add_impl(x, cond, p, options, nullptr);
}

Tensor activation(const Tensor& x, ActivationKind kind) {
  switch (kind) {
    case ActivationKind::relu:
      return relu(x);
    case ActivationKind::leaky_relu:
      return leaky_relu(x, kLeakySlope);
    case ActivationKind::tanh:
      return tanh(x);
  }
  throw ShapeError("activation: unknown kind");
}

}  // namespace cocoaan
