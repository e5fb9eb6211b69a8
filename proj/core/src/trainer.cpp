// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "cocoaan/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "cocoaan/checkpoint.hpp"
#include "cocoaan/errors.hpp"
#include "cocoaan/objectives.hpp"
#include "cocoaan/ops.hpp"
#include "cocoaan/sampler.hpp"

namespace cocoaan {
namespace {

enum NetworkStream : std::uint64_t { kStreamG = 1, kStreamS = 2, kStreamC = 3, kStreamD = 4 };

std::vector<Id> styles_of(const std::vector<CellKey>& keys) {
  std::vector<Id> out;
  for (const auto& k : keys) out.push_back(k.style);
  return out;
}

std::vector<Id> contents_of(const std::vector<CellKey>& keys) {
  std::vector<Id> out;
  for (const auto& k : keys) out.push_back(k.content);
  return out;
}

template <class P>
void clear_grads(P& p) {
  for (auto& t : parameters(p)) t.zero_grad();
}

void clear_all_grads(Networks& n) {
  clear_grads(n.g);
  clear_grads(n.s);
  clear_grads(n.c);
  clear_grads(n.d);
}

template <class P>
void step(P& net, AdamState& adam, double lr, const TrainConfig& cfg, const char* group) {
  auto params = parameters(net);
  if (cfg.clip_norm > 0) clip_grad_norm(params, cfg.clip_norm);
  adam_step(params, adam, {lr, cfg.beta1, cfg.beta2, kAdamEpsilon}, group);
}

void refresh_stores(TrainState& st, const GlyphDataset& ds, Rng& rng) {
  const auto opts = ForwardOptions::inference(st.config.precision);
  auto ub = select_updating_batches(ds, st.z_s, st.z_c, st.iteration, st.config.batch_size, rng);
  const Tensor s_codes = encoder_forward(st.nets.s, ub.style_images, ub.c_m_star, opts);
  const Tensor c_codes = encoder_forward(st.nets.c, ub.content_images, ub.s_n_star, opts);
  update_store(st.z_s, styles_of(ub.style_keys), s_codes);
  update_store(st.z_c, contents_of(ub.content_keys), c_codes);
}

void require_finite(double v, const char* what, std::int64_t iteration) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string(what) + " is non-finite at iteration " +
                       std::to_string(iteration));
  }
}

}  // namespace

Networks build_networks(const NetScale& scale, std::uint64_t seed) {
  const Rng root(seed, 0x6e657473);
  auto seed_for = [&](std::uint64_t stream) {
    Rng r = root.split(stream);
    return r.next_u64();
  };
  Networks n;
  n.g = build_generator(scale, seed_for(kStreamG));
  n.s = build_encoder(scale, seed_for(kStreamS));
  n.c = build_encoder(scale, seed_for(kStreamC));
  n.d = build_discriminator(scale, seed_for(kStreamD));
  return n;
}

TrainState init_train_state(const TrainConfig& cfg, const Manifest& manifest) {
  cfg.validate();
  TrainState st;
  st.config = cfg;
  st.manifest = manifest;
  st.nets = build_networks(cfg.scale, cfg.seed);
  st.adam_g = make_adam_state(parameters(st.nets.g));
  st.adam_s = make_adam_state(parameters(st.nets.s));
  st.adam_c = make_adam_state(parameters(st.nets.c));
  st.adam_d = make_adam_state(parameters(st.nets.d));
  st.z_s = FeatureStore(StoreRole::style, cfg.scale.code_dim);
  st.z_c = FeatureStore(StoreRole::content, cfg.scale.code_dim);
  st.rng = Rng(cfg.seed, 0x73616d70).state();
  return st;
}

MetricRow train_iteration(TrainState& st, const GlyphDataset& ds, IterationProbe* probe) {
  const auto t0 = std::chrono::steady_clock::now();
  const TrainConfig& cfg = st.config;
  if (ds.resolution() != cfg.scale.resolution) {
    throw ConfigError("dataset resolution " + std::to_string(ds.resolution()) +
                      " does not match configured resolution " +
                      std::to_string(cfg.scale.resolution));
  }
  if (ds.empty()) throw DataError("training dataset is empty");
  const Precision prec = cfg.precision;
  const auto train_opts = ForwardOptions::training(prec);
  const auto frozen_opts = ForwardOptions::frozen(prec);
  const std::int64_t b = cfg.batch_size;
  Rng rng = Rng::from_state(st.rng);
  auto& n = st.nets;
  MetricRow row;
  row.iteration = st.iteration;

  // Discriminator phase: fakes come from the stores through a frozen G; D
  // judges them under the freshly extracted codes.
  {
    if (probe) probe->g_before_disc = parameter_hash(n.g);
    auto tb = select_training_batches(ds, st.z_s, st.z_c, st.iteration, cfg.batch_size, rng);
    if (probe) probe->disc_knowns = {tb.s_i_star, tb.s_n_star, tb.c_j_star, tb.c_m_star};
    const Tensor s_i = encoder_forward(n.s, tb.style_paired, tb.c_m_star, train_opts);
    const Tensor c_j = encoder_forward(n.c, tb.content_paired, tb.s_n_star, train_opts);
    const Tensor fake = generator_forward(n.g, tb.s_i_star, tb.c_j_star, frozen_opts);
    const Tensor images[] = {tb.coherent, fake};
    const Tensor s2[] = {s_i, s_i};
    const Tensor c2[] = {c_j, c_j};
    const Tensor logits =
        discriminator_forward(n.d, concat(images, 0), concat(s2, 0), concat(c2, 0), train_opts);
    const LossBundle v = disc_step_loss(narrow(logits, 0, 0, b), narrow(logits, 0, b, b));
    row.loss_d = -v.adv_term;
    require_finite(row.loss_d, "discriminator loss", st.iteration);
    backward(scale(v.total, -1.0));
    step(n.s, st.adam_s, cfg.lr_s, cfg, "style encoder");
    step(n.c, st.adam_c, cfg.lr_c, cfg, "content encoder");
    step(n.d, st.adam_d, cfg.lr_d, cfg, "discriminator");
    clear_all_grads(n);
    if (probe) probe->g_after_disc = parameter_hash(n.g);
  }

  refresh_stores(st, ds, rng);

  // Generator phase: fakes from extracted codes, judged by a frozen D under
  // the stored codes, plus the L1 pull towards the coherent batch.
  {
    if (probe) probe->d_before_gen = parameter_hash(n.d);
    auto tb = select_training_batches(ds, st.z_s, st.z_c, st.iteration, cfg.batch_size, rng);
    if (probe) probe->gen_knowns = {tb.s_i_star, tb.s_n_star, tb.c_j_star, tb.c_m_star};
    const Tensor s_i = encoder_forward(n.s, tb.style_paired, tb.c_m_star, train_opts);
    const Tensor c_j = encoder_forward(n.c, tb.content_paired, tb.s_n_star, train_opts);
    const Tensor fake = generator_forward(n.g, s_i, c_j, train_opts);
    const auto d_opts = cfg.generator_phase_updates_d ? train_opts : frozen_opts;
    const Tensor logits = discriminator_forward(n.d, fake, tb.s_i_star, tb.c_j_star, d_opts);
    const LossBundle l =
        gen_step_loss(logits, fake, tb.coherent, {cfg.lambda, cfg.non_saturating});
    row.loss_g_adv = l.adv_term;
    row.loss_l1 = l.l1_term;
    require_finite(l.total.item(), "generator loss", st.iteration);
    backward(l.total);
    step(n.s, st.adam_s, cfg.lr_s, cfg, "style encoder");
    step(n.c, st.adam_c, cfg.lr_c, cfg, "content encoder");
    if (cfg.generator_phase_updates_d) {
      step(n.d, st.adam_d, cfg.lr_d, cfg, "discriminator");
    } else {
      step(n.g, st.adam_g, cfg.lr_g, cfg, "generator");
    }
    clear_all_grads(n);
    if (probe) probe->d_after_gen = parameter_hash(n.d);
  }

  refresh_stores(st, ds, rng);

  st.rng = rng.state();
  st.iteration += 1;
  row.cov_s = static_cast<std::int64_t>(st.z_s.size());
  row.cov_c = static_cast<std::int64_t>(st.z_c.size());
  row.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  st.recent.push_back(row);
  while (st.recent.size() > kMetricHistory) st.recent.pop_front();
  return row;
}

std::string format_metric_row(const MetricRow& r, bool with_wall_time) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%lld,%lld",
                static_cast<long long>(r.iteration), r.loss_d, r.loss_g_adv, r.loss_l1,
                static_cast<long long>(r.cov_s), static_cast<long long>(r.cov_c));
  std::string out = buf;
  if (with_wall_time) {
    std::snprintf(buf, sizeof buf, ",%.3f", r.wall_ms);
    out += buf;
  }
  return out;
}

std::vector<MetricRow> train(TrainState& st, const GlyphDataset& ds,
                             const TrainRunOptions& options) {
  std::vector<MetricRow> rows;
  std::filesystem::path last_checkpoint;
  if (options.metrics && options.write_header) *options.metrics << kMetricsHeader << '\n';
  while (st.iteration < st.config.iterations) {
    MetricRow row;
    try {
      row = train_iteration(st, ds);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + "; last good checkpoint: " +
                         (last_checkpoint.empty() ? std::string("none")
                                                  : last_checkpoint.string()));
    }
    rows.push_back(row);
    if (options.metrics) *options.metrics << format_metric_row(row) << '\n' << std::flush;
    if (options.on_iteration) options.on_iteration(row);
    const auto every = st.config.checkpoint_every;
    if (every > 0 && !options.checkpoint_dir.empty() && st.iteration % every == 0) {
      std::filesystem::create_directories(options.checkpoint_dir);
      last_checkpoint =
          options.checkpoint_dir / ("ckpt_" + std::to_string(st.iteration) + ".bin");
      save_checkpoint(st, last_checkpoint);
      save_checkpoint(st, options.checkpoint_dir / "latest.bin");
    }
  }
  return rows;
}

}  // namespace cocoaan
