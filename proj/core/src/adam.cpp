// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "cocoaan/adam.hpp"

#include <cmath>

#include "cocoaan/errors.hpp"

namespace cocoaan {

AdamState make_adam_state(std::span<const Tensor> params) {
  AdamState s;
  for (const auto& p : params) {
    s.m.emplace_back(static_cast<std::size_t>(p.numel()), 0.0);
    s.v.emplace_back(static_cast<std::size_t>(p.numel()), 0.0);
  }
  return s;
}

void adam_step(std::span<Tensor> params, AdamState& state, const AdamHyper& hyper,
               const std::string& group) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("adam_step(" + group + "): state holds " + std::to_string(state.m.size()) +
                     " moments for " + std::to_string(params.size()) + " parameters");
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (state.m[p].size() != static_cast<std::size_t>(params[p].numel())) {
      throw ShapeError("adam_step(" + group + "): moment size mismatch at parameter " +
                       std::to_string(p));
    }
    for (std::size_t i = 0; i < params[p].grad().size(); ++i) {
      if (!std::isfinite(params[p].grad()[i])) {
        throw NumericError("adam_step(" + group + "): non-finite gradient in parameter " +
                           std::to_string(p) + " " + shape_str(params[p].shape()) +
                           " at element " + std::to_string(i));
      }
    }
  }

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(hyper.beta1, t);
  const double c2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto w = params[p].mutable_data();
    const auto g = params[p].grad();
    auto& m = state.m[p];
    auto& v = state.v[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g.empty() ? 0.0 : g[i];
      m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * gi;
      v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * gi * gi;
      w[i] -= hyper.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + hyper.eps);
    }
    params[p].zero_grad();
  }
}

double global_grad_norm(std::span<const Tensor> params) {
  double acc = 0.0;
  for (const auto& p : params) {
    for (double g : p.grad()) acc += g * g;
  }
  return std::sqrt(acc);
}

double clip_grad_norm(std::span<Tensor> params, double max_norm) {
  if (!(max_norm > 0)) throw ConfigError("clip_grad_norm: max_norm must be positive");
  const double norm = global_grad_norm(params);
  if (norm > max_norm) {
    const double f = max_norm / norm;
    for (auto& p : params) {
      for (double& g : p.mutable_grad()) g *= f;
    }
  }
  return norm;
}

}  // namespace cocoaan
