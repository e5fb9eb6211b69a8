// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "cocoaan/layers.hpp"
#include "cocoaan/rng.hpp"
#include "cocoaan/tensor.hpp"

namespace cocoaan::testing {

inline Tensor random_tensor(const Shape& shape, std::uint64_t seed, double stddev = 1.0) {
  Rng rng(seed, 99);
  return Tensor::randn(shape, rng, 0.0, stddev);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

/// Quadruple-loop cross-correlation; weight [O,C,k,k].
inline std::vector<double> reference_conv(const Tensor& x, const Tensor& w, const Tensor& bias,
                                          int stride, int pad) {
  const auto B = x.size(0), C = x.size(1), H = x.size(2), W = x.size(3);
  const auto O = w.size(0), K = w.size(2);
  const auto OH = (H + 2 * pad - K) / stride + 1, OW = (W + 2 * pad - K) / stride + 1;
  std::vector<double> out(static_cast<std::size_t>(B * O * OH * OW));
  const auto xd = x.data();
  const auto wd = w.data();
  for (std::int64_t b = 0; b < B; ++b)
    for (std::int64_t o = 0; o < O; ++o)
      for (std::int64_t oy = 0; oy < OH; ++oy)
        for (std::int64_t ox = 0; ox < OW; ++ox) {
          double acc = bias.defined() ? bias.data()[o] : 0.0;
          for (std::int64_t c = 0; c < C; ++c)
            for (std::int64_t ky = 0; ky < K; ++ky)
              for (std::int64_t kx = 0; kx < K; ++kx) {
                const auto iy = oy * stride - pad + ky, ix = ox * stride - pad + kx;
                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                acc += xd[((b * C + c) * H + iy) * W + ix] * wd[((o * C + c) * K + ky) * K + kx];
              }
          out[((b * O + o) * OH + oy) * OW + ox] = acc;
        }
  return out;
}

/// Largest singular value of `w` viewed as [shape[0], rest].
inline double largest_singular_value(const Tensor& w) {
  const auto rows = w.size(0);
  const auto cols = w.numel() / rows;
  Eigen::MatrixXd m(rows, cols);
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = 0; c < cols; ++c) m(r, c) = w.data()[r * cols + c];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("cocoaan_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace cocoaan::testing
