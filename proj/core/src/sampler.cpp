// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "cocoaan/sampler.hpp"

#include "cocoaan/errors.hpp"

namespace cocoaan {
namespace {

template <class Pred>
std::vector<CellKey> eligible_cells(const GlyphDataset& ds, Pred pred) {
  std::vector<CellKey> out;
  for (const auto& k : ds.cells()) {
    if (pred(k)) out.push_back(k);
  }
  return out;
}

void check_batch_size(int batch_size) {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

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

const CellKey& pick(const std::vector<CellKey>& pool, Rng& rng) {
  return pool[static_cast<std::size_t>(rng.below(pool.size()))];
}

}  // namespace

BatchTriple select_training_batches(const GlyphDataset& ds, const FeatureStore& z_s,
                                    const FeatureStore& z_c, std::int64_t iteration,
                                    int batch_size, Rng& rng) {
  check_batch_size(batch_size);
  const auto pool = eligible_cells(ds, [&](const CellKey& k) {
    return iteration == 0 || (z_s.contains(k.style) && z_c.contains(k.content));
  });
  if (pool.empty()) throw DataError("sampler exhausted: no cell is covered by both stores");

  BatchTriple b;
  for (int pos = 0; pos < batch_size; ++pos) {
    bool found = false;
    for (int attempt = 0; attempt < kMaxResampleAttempts && !found; ++attempt) {
      const CellKey im = pick(pool, rng);
      const CellKey nj = pick(pool, rng);
      const CellKey ij{im.style, nj.content};
      if (!ds.contains(ij)) continue;
      b.coherent_keys.push_back(ij);
      b.style_keys.push_back(im);
      b.content_keys.push_back(nj);
      found = true;
    }
    if (!found) {
      throw DataError("sampler exhausted: no coherent cell after " +
                      std::to_string(kMaxResampleAttempts) + " draws at position " +
                      std::to_string(pos));
    }
  }
  b.coherent = ds.batch(b.coherent_keys);
  b.style_paired = ds.batch(b.style_keys);
  b.content_paired = ds.batch(b.content_keys);
  b.s_i_star = known_codes(z_s, styles_of(b.style_keys), iteration, rng);
  b.s_n_star = known_codes(z_s, styles_of(b.content_keys), iteration, rng);
  b.c_j_star = known_codes(z_c, contents_of(b.content_keys), iteration, rng);
  b.c_m_star = known_codes(z_c, contents_of(b.style_keys), iteration, rng);
  return b;
}

UpdateBatches select_updating_batches(const GlyphDataset& ds, const FeatureStore& z_s,
                                      const FeatureStore& z_c, std::int64_t iteration,
                                      int batch_size, Rng& rng) {
  check_batch_size(batch_size);
  const auto style_pool = eligible_cells(
      ds, [&](const CellKey& k) { return iteration == 0 || z_c.contains(k.content); });
  const auto content_pool = eligible_cells(
      ds, [&](const CellKey& k) { return iteration == 0 || z_s.contains(k.style); });
  if (style_pool.empty()) throw DataError("sampler exhausted: no cell with a covered content");
  if (content_pool.empty()) throw DataError("sampler exhausted: no cell with a covered style");

  UpdateBatches u;
  for (int pos = 0; pos < batch_size; ++pos) u.style_keys.push_back(pick(style_pool, rng));
  for (int pos = 0; pos < batch_size; ++pos) u.content_keys.push_back(pick(content_pool, rng));
  u.style_images = ds.batch(u.style_keys);
  u.content_images = ds.batch(u.content_keys);
  u.c_m_star = known_codes(z_c, contents_of(u.style_keys), iteration, rng);
  u.s_n_star = known_codes(z_s, styles_of(u.content_keys), iteration, rng);
  return u;
}

}  // namespace cocoaan
