// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "cocoaan/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cocoaan/errors.hpp"

namespace cocoaan {
namespace {

double evaluate(const std::function<Tensor()>& loss) {
  const Tensor out = loss();
  const double v = out.item();
  if (!std::isfinite(v)) throw NumericError("finite_diff_check: non-finite function value");
  return v;
}

std::vector<std::int64_t> probe_coords(std::int64_t n, const GradCheckOptions& options, Rng& rng) {
  std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  if (options.max_coords_per_tensor <= 0 || options.max_coords_per_tensor >= n) return idx;
  // Partial Fisher-Yates.
  for (std::int64_t i = 0; i < options.max_coords_per_tensor; ++i) {
    const auto j = i + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(options.max_coords_per_tensor));
  return idx;
}

}  // namespace

double finite_diff_check_leaves(const std::function<Tensor()>& loss, std::span<Tensor> leaves,
                                const GradCheckOptions& options) {
  std::vector<bool> tracked;
  for (auto& t : leaves) {
    tracked.push_back(t.requires_grad());
    t.zero_grad();
    t.set_requires_grad(true);
  }
  const Tensor out = loss();
  if (out.numel() != 1) throw ShapeError("finite_diff_check: function must return a scalar");
  if (!std::isfinite(out.item())) throw NumericError("finite_diff_check: non-finite function value");
  backward(out);
  // Probes only need values.
  for (auto& t : leaves) t.set_requires_grad(false);

  Rng rng(options.seed);
  double worst = 0.0;
  for (auto& t : leaves) {
    const std::vector<double> analytic =
        t.has_grad() ? std::vector<double>(t.grad().begin(), t.grad().end())
                     : std::vector<double>(static_cast<std::size_t>(t.numel()), 0.0);
    auto data = t.mutable_data();
    for (const auto i : probe_coords(t.numel(), options, rng)) {
      const double saved = data[i];
      data[i] = saved + options.eps;
      const double up = evaluate(loss);
      data[i] = saved - options.eps;
      const double down = evaluate(loss);
      data[i] = saved;
      const double numeric = (up - down) / (2.0 * options.eps);
      const double err = std::fabs(analytic[i] - numeric) / std::max(1.0, std::fabs(analytic[i]));
      worst = std::max(worst, err);
    }
  }
  for (std::size_t k = 0; k < leaves.size(); ++k) leaves[k].set_requires_grad(tracked[k]);
  return worst;
}

double finite_diff_check(const TensorFunction& f, std::span<const Tensor> inputs,
                         const GradCheckOptions& options) {
  std::vector<Tensor> copies;
  copies.reserve(inputs.size());
  for (const auto& t : inputs) copies.push_back(t.clone());
  return finite_diff_check_leaves([&] { return f(copies); }, copies, options);
}

}  // namespace cocoaan
