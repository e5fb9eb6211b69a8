// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cocoaan/layers.hpp"

namespace cocoaan {

/// Size knobs for all four networks. At (128, 128, 1) every layer matches
/// the reference architecture tables exactly; smaller values keep the 4x4
/// bottleneck and use log2(resolution / 4) stride-2 stages.
struct NetScale {
  int resolution = 128;
  int code_dim = 128;
  double width_mult = 1.0;

  /// Throws ConfigError for non-power-of-two resolutions outside [8, 128],
  /// non-positive code_dim, width outside (0, 1], or scaled channel counts
  /// that are fractional or below 8.
  void validate() const;
  int stride2_stages() const;
  /// base * width_mult, validated.
  std::int64_t channels(std::int64_t base) const;

  friend bool operator==(const NetScale&, const NetScale&) = default;
};

/// One row of a declarative shape plan: per-sample output shape of a stage.
struct ShapeRow {
  std::string label;
  Shape shape;

  friend bool operator==(const ShapeRow&, const ShapeRow&) = default;
};
using ShapePlan = std::vector<ShapeRow>;

/// Named tensor or buffer inside a parameter set, in a stable order.
struct StateEntry {
  std::string name;
  Tensor tensor;                          // trainable parameter, or undefined
  std::vector<double>* buffer = nullptr;  // SN u / BN running stats, or null
};

struct GeneratorParams {
  NetScale scale;
  ConvParams style_stem;
  ConvParams content_stem;
  BatchNormParams style_stem_bn;
  BatchNormParams content_stem_bn;
  std::vector<ConvParams> up;
  std::vector<BatchNormParams> up_bn;
  ConvParams head;
  ShapePlan plan;
};

/// A stride-2 SN conv stage, optionally conditioned via FC-Add.
struct DownStage {
  ConvParams conv;
  std::optional<FcAddParams> condition;
};

/// Shared body of the encoders and the discriminator.
struct DownsamplingNet {
  NetScale scale;
  std::int64_t cond_dim = 0;
  std::int64_t out_dim = 0;
  std::vector<DownStage> stages;
  ConvParams head;
  ShapePlan plan;
};

struct EncoderParams {
  DownsamplingNet net;
};

struct DiscriminatorParams {
  DownsamplingNet net;
};

GeneratorParams build_generator(const NetScale& scale, std::uint64_t seed);
EncoderParams build_encoder(const NetScale& scale, std::uint64_t seed);
DiscriminatorParams build_discriminator(const NetScale& scale, std::uint64_t seed);

/// Appends per-sample stage shapes when non-null.
using ShapeTrace = ShapePlan;

/// Image batch [B,1,R,R] in (-1, 1) from code batches s, c of shape [B, code_dim].
Tensor generator_forward(GeneratorParams& p, const Tensor& s, const Tensor& c,
                         const ForwardOptions& options, ShapeTrace* trace = nullptr);
Tensor generator_forward(const GeneratorParams& p, const Tensor& s, const Tensor& c,
                         const ForwardOptions& options, ShapeTrace* trace = nullptr);

/// Code batch [B, code_dim]. For the style encoder `cond` is a content code,
/// for the content encoder a style code.
Tensor encoder_forward(EncoderParams& p, const Tensor& x, const Tensor& cond,
                       const ForwardOptions& options, ShapeTrace* trace = nullptr);
Tensor encoder_forward(const EncoderParams& p, const Tensor& x, const Tensor& cond,
                       const ForwardOptions& options, ShapeTrace* trace = nullptr);

/// Raw logits [B]; the joint condition is concat(s, c) along the code axis.
Tensor discriminator_forward(DiscriminatorParams& p, const Tensor& x, const Tensor& s,
                             const Tensor& c, const ForwardOptions& options,
                             ShapeTrace* trace = nullptr);
Tensor discriminator_forward(const DiscriminatorParams& p, const Tensor& x, const Tensor& s,
                             const Tensor& c, const ForwardOptions& options,
                             ShapeTrace* trace = nullptr);

std::vector<StateEntry> state_entries(GeneratorParams& p);
std::vector<StateEntry> state_entries(EncoderParams& p);
std::vector<StateEntry> state_entries(DiscriminatorParams& p);

/// Trainable tensors (shallow handles) in state_entries order.
template <class P>
std::vector<Tensor> parameters(P& p) {
  std::vector<Tensor> out;
  for (auto& e : state_entries(p)) {
    if (e.tensor.defined()) out.push_back(e.tensor);
  }
  return out;
}

/// FNV-1a over every parameter and buffer byte; equal hashes mean equal state.
std::uint64_t hash_state(const std::vector<StateEntry>& entries);

template <class P>
std::uint64_t parameter_hash(P& p) {
  return hash_state(state_entries(p));
}

}  // namespace cocoaan
