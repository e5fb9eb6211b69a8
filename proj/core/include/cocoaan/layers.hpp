// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "cocoaan/ops.hpp"
#include "cocoaan/tensor.hpp"

namespace cocoaan {

inline constexpr int kKernelSize = 4;
inline constexpr double kLeakySlope = 0.2;
inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;

/// Persistent left-singular-vector estimate for one weight matrix.
struct SpectralState {
  std::vector<double> u;  // unit norm, length = weight.shape[0]
  int n_power_iterations = 1;
};

/// Random unit vector of the given length.
SpectralState make_spectral_state(std::int64_t rows, Rng& rng, int n_power_iterations = 1);

struct SpectralResult {
  Tensor weight;  // w / sigma
  SpectralState state;
  double sigma = 0.0;
};

/// Runs `s.n_power_iterations` power-iteration steps on w viewed as
/// [shape[0], rest] (zero steps re-derives v from the stored u), then divides
/// by sigma = u^T W v. u and v are constants for the gradient.
SpectralResult spectral_normalize(const Tensor& w, const SpectralState& s);

/// Convolution or transposed convolution parameters. For transposed layers
/// the weight is [in_ch, out_ch, k, k] so that it is the conv2d weight of
/// the adjoint map.
struct ConvParams {
  Tensor weight;
  Tensor bias;
  int stride = 1;
  int padding = 0;
  std::optional<SpectralState> spectral;
};

/// Fully-connected conditioning added per channel.
struct FcAddParams {
  Tensor weight;  // [channels, cond_dim]
  Tensor bias;    // [channels]
  std::optional<SpectralState> spectral;
};

struct BatchNormParams {
  Tensor gamma;
  Tensor beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
};

BatchNormParams make_batch_norm(std::int64_t channels);

enum class ActivationKind { relu, leaky_relu, tanh };

/// How a network pass treats mode-dependent layers and its own parameters.
struct ForwardOptions {
  /// Batch statistics in BN (otherwise running statistics).
  bool train = false;
  /// Persist SN power-iteration state and BN running statistics.
  bool update_state = false;
  /// Record gradients for this network's parameters. When false the
  /// parameters enter the graph detached and stay constants.
  bool track_params = true;
  Precision precision = Precision::f64;

  static ForwardOptions training(Precision p = Precision::f64) { return {true, true, true, p}; }
  /// Frozen network inside another network's update: no parameter grads, no
  /// state changes, batch statistics.
  static ForwardOptions frozen(Precision p = Precision::f64) { return {true, false, false, p}; }
  static ForwardOptions inference(Precision p = Precision::f64) {
    return {false, false, false, p};
  }
};

/// Returns the weight actually applied: spectrally normalized if the layer
/// carries SN state, detached if parameters are not tracked. Persists the
/// updated u when `state` is non-null and options.update_state is set.
Tensor effective_weight(const Tensor& weight, const std::optional<SpectralState>& spectral,
                        const ForwardOptions& options, std::optional<SpectralState>* state_out);

Tensor conv2d(const Tensor& x, ConvParams& p, const ForwardOptions& options);
Tensor conv2d(const Tensor& x, const ConvParams& p, const ForwardOptions& options);
Tensor deconv2d(const Tensor& x, const ConvParams& p, const ForwardOptions& options);

Tensor batch_norm(const Tensor& x, BatchNormParams& p, const ForwardOptions& options);
Tensor batch_norm(const Tensor& x, const BatchNormParams& p, const ForwardOptions& options);

/// y[b,c,h,w] = x[b,c,h,w] + (W cond[b] + bias)[c].
Tensor fc_add(const Tensor& x, const Tensor& cond, FcAddParams& p, const ForwardOptions& options);
Tensor fc_add(const Tensor& x, const Tensor& cond, const FcAddParams& p,
              const ForwardOptions& options);

Tensor activation(const Tensor& x, ActivationKind kind);

}  // namespace cocoaan
