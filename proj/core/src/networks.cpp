// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "cocoaan/networks.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "cocoaan/errors.hpp"

namespace cocoaan {

constexpr double kInitStddev = 0.02;

void NetScale::validate() const {
  if (resolution < 8 || resolution > 128 || !std::has_single_bit(static_cast<unsigned>(resolution))) {
    throw ConfigError("resolution must be a power of two in [8, 128], got " +
                      std::to_string(resolution));
  }
  if (code_dim < 1) throw ConfigError("code_dim must be positive");
  if (!(width_mult > 0.0 && width_mult <= 1.0)) throw ConfigError("width_mult must be in (0, 1]");
  // Narrowest layer in any network is 64 * width_mult (encoder first stage at 128).
  const int n = stride2_stages();
  (void)channels(1024 >> (n - 1));
  (void)channels(512);
}

int NetScale::stride2_stages() const { return std::countr_zero(static_cast<unsigned>(resolution)) - 2; }

std::int64_t NetScale::channels(std::int64_t base) const {
  const double scaled = static_cast<double>(base) * width_mult;
  const double rounded = std::round(scaled);
  if (std::fabs(scaled - rounded) > 1e-9) {
    throw ConfigError("width_mult " + std::to_string(width_mult) + " gives fractional channel count for " +
                      std::to_string(base));
  }
  if (rounded < 8) {
    throw ConfigError("width_mult " + std::to_string(width_mult) + " leaves fewer than 8 channels for " +
                      std::to_string(base));
  }
  return static_cast<std::int64_t>(rounded);
}

namespace {

ConvParams make_conv(std::int64_t out_ch, std::int64_t in_ch, int stride, int padding,
                     bool transposed, bool spectral, Rng& rng) {
  ConvParams p;
  const Shape shape = transposed ? Shape{in_ch, out_ch, kKernelSize, kKernelSize}
                                 : Shape{out_ch, in_ch, kKernelSize, kKernelSize};
  p.weight = Tensor::randn(shape, rng, 0.0, kInitStddev).set_requires_grad(true);
  p.bias = Tensor::zeros({out_ch}).set_requires_grad(true);
  p.stride = stride;
  p.padding = padding;
  if (spectral) p.spectral = make_spectral_state(shape[0], rng);
  return p;
}

FcAddParams make_fc_add(std::int64_t channels, std::int64_t cond_dim, Rng& rng) {
  FcAddParams p;
  p.weight = Tensor::randn({channels, cond_dim}, rng, 0.0, kInitStddev).set_requires_grad(true);
  p.bias = Tensor::zeros({channels}).set_requires_grad(true);
  p.spectral = make_spectral_state(channels, rng);
  return p;
}

void record(ShapeTrace* trace, const std::string& label, const Tensor& t) {
  if (!trace) return;
  const Shape& s = t.shape();
  trace->push_back({label, Shape(s.begin() + 1, s.end())});
}

// Channel schedules indexed from the input side, for n stride-2 stages.
std::vector<std::int64_t> encoder_channels(const NetScale& scale) {
  const int n = scale.stride2_stages();
  std::vector<std::int64_t> out;
  for (int k = 0; k < n; ++k) out.push_back(scale.channels(1024 >> (n - 1 - k)));
  return out;
}

std::vector<std::int64_t> discriminator_channels(const NetScale& scale) {
  const int n = scale.stride2_stages();
  std::vector<std::int64_t> out;
  for (int k = 0; k < n; ++k) {
    const int from_output = n - 1 - k;
    const std::int64_t base = from_output == 0 ? 1024 : from_output == 1 ? 512 : 512 >> (from_output - 2);
    out.push_back(scale.channels(base));
  }
  return out;
}

constexpr int kConditionedStages = 3;

DownsamplingNet build_downsampling(const NetScale& scale, std::vector<std::int64_t> widths,
                                   std::int64_t cond_dim, std::int64_t out_dim, Rng& rng) {
  DownsamplingNet net;
  net.scale = scale;
  net.cond_dim = cond_dim;
  net.out_dim = out_dim;
  std::int64_t in_ch = 1;
  std::int64_t side = scale.resolution;
  for (std::size_t k = 0; k < widths.size(); ++k) {
    DownStage stage;
    stage.conv = make_conv(widths[k], in_ch, 2, 1, false, true, rng);
    if (k < kConditionedStages) stage.condition = make_fc_add(widths[k], cond_dim, rng);
    net.stages.push_back(std::move(stage));
    side /= 2;
    in_ch = widths[k];
    net.plan.push_back({"stage" + std::to_string(k + 1), {in_ch, side, side}});
  }
  net.head = make_conv(out_dim, in_ch, 1, 0, false, true, rng);
  net.plan.push_back({"head", {out_dim}});
  return net;
}

template <class Net>
Tensor downsampling_forward(Net& net, const Tensor& x, const Tensor& cond,
                            const ForwardOptions& options, ShapeTrace* trace) {
  const auto r = net.scale.resolution;
  if (x.dim() != 4 || x.size(1) != 1 || x.size(2) != r || x.size(3) != r) {
    throw ShapeError("expected image batch [B,1," + std::to_string(r) + "," + std::to_string(r) +
                     "], got " + shape_str(x.shape()));
  }
  if (cond.dim() != 2 || cond.size(0) != x.size(0) || cond.size(1) != net.cond_dim) {
    throw ShapeError("expected condition [" + std::to_string(x.size(0)) + "," +
                     std::to_string(net.cond_dim) + "], got " + shape_str(cond.shape()));
  }
  Tensor h = x;
  for (std::size_t k = 0; k < net.stages.size(); ++k) {
    auto& stage = net.stages[k];
    h = conv2d(h, stage.conv, options);
    if (stage.condition) h = fc_add(h, cond, *stage.condition, options);
    h = activation(h, ActivationKind::leaky_relu);
    record(trace, "stage" + std::to_string(k + 1), h);
  }
  h = conv2d(h, net.head, options);
  h = reshape(h, {x.size(0), net.out_dim});
  record(trace, "head", h);
  return h;
}

template <class G>
Tensor generator_forward_impl(G& p, const Tensor& s, const Tensor& c, const ForwardOptions& options,
                              ShapeTrace* trace) {
  const auto d = p.scale.code_dim;
  if (s.dim() != 2 || c.dim() != 2 || s.size(1) != d || c.size(1) != d || s.size(0) != c.size(0)) {
    throw ShapeError("generator: expected code batches [B," + std::to_string(d) + "], got " +
                     shape_str(s.shape()) + " and " + shape_str(c.shape()));
  }
  const std::int64_t batch = s.size(0);
  auto stem = [&](const Tensor& code, auto& conv, auto& bn, const char* label) {
    Tensor h = deconv2d(reshape(code, {batch, d, 1, 1}), conv, options);
    h = activation(batch_norm(h, bn, options), ActivationKind::relu);
    record(trace, label, h);
    return h;
  };
  const Tensor hs = stem(s, p.style_stem, p.style_stem_bn, "style_stem");
  const Tensor hc = stem(c, p.content_stem, p.content_stem_bn, "content_stem");
  const Tensor parts[] = {hs, hc};
  Tensor h = concat(parts, 1);
  record(trace, "concat", h);
  for (std::size_t k = 0; k < p.up.size(); ++k) {
    h = deconv2d(h, p.up[k], options);
    h = activation(batch_norm(h, p.up_bn[k], options), ActivationKind::relu);
    record(trace, "up" + std::to_string(k + 1), h);
  }
  h = activation(deconv2d(h, p.head, options), ActivationKind::tanh);
  record(trace, "head", h);
  return h;
}

Tensor discriminator_condition(const Tensor& s, const Tensor& c) {
  const Tensor parts[] = {s, c};
  return concat(parts, 1);
}

void append_conv(std::vector<StateEntry>& out, const std::string& prefix, ConvParams& p) {
  out.push_back({prefix + ".weight", p.weight, nullptr});
  out.push_back({prefix + ".bias", p.bias, nullptr});
  if (p.spectral) out.push_back({prefix + ".sn_u", {}, &p.spectral->u});
}

void append_bn(std::vector<StateEntry>& out, const std::string& prefix, BatchNormParams& p) {
  out.push_back({prefix + ".gamma", p.gamma, nullptr});
  out.push_back({prefix + ".beta", p.beta, nullptr});
  out.push_back({prefix + ".running_mean", {}, &p.running_mean});
  out.push_back({prefix + ".running_var", {}, &p.running_var});
}

std::vector<StateEntry> downsampling_entries(DownsamplingNet& net) {
  std::vector<StateEntry> out;
  for (std::size_t k = 0; k < net.stages.size(); ++k) {
    const std::string prefix = "stage" + std::to_string(k + 1);
    append_conv(out, prefix + ".conv", net.stages[k].conv);
    if (auto& fc = net.stages[k].condition) {
      out.push_back({prefix + ".fc.weight", fc->weight, nullptr});
      out.push_back({prefix + ".fc.bias", fc->bias, nullptr});
      out.push_back({prefix + ".fc.sn_u", {}, &fc->spectral->u});
    }
  }
  append_conv(out, "head", net.head);
  return out;
}

}  // namespace

GeneratorParams build_generator(const NetScale& scale, std::uint64_t seed) {
  scale.validate();
  Rng rng(seed);
  GeneratorParams p;
  p.scale = scale;
  const std::int64_t stem_ch = scale.channels(512);
  p.style_stem = make_conv(stem_ch, scale.code_dim, 1, 0, true, false, rng);
  p.content_stem = make_conv(stem_ch, scale.code_dim, 1, 0, true, false, rng);
  p.style_stem_bn = make_batch_norm(stem_ch);
  p.content_stem_bn = make_batch_norm(stem_ch);
  p.plan.push_back({"style_stem", {stem_ch, 4, 4}});
  p.plan.push_back({"content_stem", {stem_ch, 4, 4}});
  std::int64_t ch = 2 * stem_ch;
  std::int64_t side = 4;
  p.plan.push_back({"concat", {ch, side, side}});
  const int n = scale.stride2_stages();
  for (int k = 0; k + 1 < n; ++k) {
    const std::int64_t out_ch = scale.channels(1024 >> k);
    p.up.push_back(make_conv(out_ch, ch, 2, 1, true, false, rng));
    p.up_bn.push_back(make_batch_norm(out_ch));
    ch = out_ch;
    side *= 2;
    p.plan.push_back({"up" + std::to_string(k + 1), {ch, side, side}});
  }
  p.head = make_conv(1, ch, 2, 1, true, false, rng);
  p.plan.push_back({"head", {1, side * 2, side * 2}});
  return p;
}

EncoderParams build_encoder(const NetScale& scale, std::uint64_t seed) {
  scale.validate();
  Rng rng(seed);
  return {build_downsampling(scale, encoder_channels(scale), scale.code_dim, scale.code_dim, rng)};
}

DiscriminatorParams build_discriminator(const NetScale& scale, std::uint64_t seed) {
  scale.validate();
  Rng rng(seed);
  return {build_downsampling(scale, discriminator_channels(scale), 2 * scale.code_dim, 1, rng)};
}

Tensor generator_forward(GeneratorParams& p, const Tensor& s, const Tensor& c,
                         const ForwardOptions& options, ShapeTrace* trace) {
  return generator_forward_impl(p, s, c, options, trace);
}

Tensor generator_forward(const GeneratorParams& p, const Tensor& s, const Tensor& c,
                         const ForwardOptions& options, ShapeTrace* trace) {
  return generator_forward_impl(p, s, c, options, trace);
}

Tensor encoder_forward(EncoderParams& p, const Tensor& x, const Tensor& cond,
                       const ForwardOptions& options, ShapeTrace* trace) {
  return downsampling_forward(p.net, x, cond, options, trace);
}

Tensor encoder_forward(const EncoderParams& p, const Tensor& x, const Tensor& cond,
                       const ForwardOptions& options, ShapeTrace* trace) {
  return downsampling_forward(p.net, x, cond, options, trace);
}

Tensor discriminator_forward(DiscriminatorParams& p, const Tensor& x, const Tensor& s,
                             const Tensor& c, const ForwardOptions& options, ShapeTrace* trace) {
  const Tensor logits = downsampling_forward(p.net, x, discriminator_condition(s, c), options, trace);
  return reshape(logits, {x.size(0)});
}

Tensor discriminator_forward(const DiscriminatorParams& p, const Tensor& x, const Tensor& s,
                             const Tensor& c, const ForwardOptions& options, ShapeTrace* trace) {
  const Tensor logits = downsampling_forward(p.net, x, discriminator_condition(s, c), options, trace);
  return reshape(logits, {x.size(0)});
}

std::vector<StateEntry> state_entries(GeneratorParams& p) {
  std::vector<StateEntry> out;
  append_conv(out, "style_stem", p.style_stem);
  append_bn(out, "style_stem_bn", p.style_stem_bn);
  append_conv(out, "content_stem", p.content_stem);
  append_bn(out, "content_stem_bn", p.content_stem_bn);
  for (std::size_t k = 0; k < p.up.size(); ++k) {
    append_conv(out, "up" + std::to_string(k + 1), p.up[k]);
    append_bn(out, "up" + std::to_string(k + 1) + "_bn", p.up_bn[k]);
  }
  append_conv(out, "head", p.head);
  return out;
}

std::vector<StateEntry> state_entries(EncoderParams& p) { return downsampling_entries(p.net); }
std::vector<StateEntry> state_entries(DiscriminatorParams& p) { return downsampling_entries(p.net); }

std::uint64_t hash_state(const std::vector<StateEntry>& entries) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::span<const double> values) {
    for (double v : values) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, &v, sizeof bits);
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xFF;
        h *= 0x100000001b3ULL;
      }
    }
  };
  for (const auto& e : entries) {
    if (e.tensor.defined()) mix(e.tensor.data());
    if (e.buffer) mix(*e.buffer);
  }
  return h;
}

}  // namespace cocoaan
