// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "cocoaan/dataset.hpp"
#include "cocoaan/feature_store.hpp"
#include "cocoaan/rng.hpp"

namespace cocoaan {

/// Retries per batch position before a sparse grid is declared exhausted.
inline constexpr int kMaxResampleAttempts = 256;

/// Positionwise paired batches. Position k forms one tuple (i, j, m, n):
/// coherent_keys[k] = (i, j), style_keys[k] = (i, m), content_keys[k] = (n, j).
struct BatchTriple {
  std::vector<CellKey> coherent_keys;
  std::vector<CellKey> style_keys;
  std::vector<CellKey> content_keys;
  Tensor coherent;        // x_{i,j}
  Tensor style_paired;    // x_{i,m}
  Tensor content_paired;  // x_{n,j}
  Tensor s_i_star;
  Tensor s_n_star;
  Tensor c_j_star;
  Tensor c_m_star;
};

struct UpdateBatches {
  std::vector<CellKey> style_keys;    // (i, m)
  Tensor style_images;                // x_{i,m}
  Tensor c_m_star;
  std::vector<CellKey> content_keys;  // (n, j)
  Tensor content_images;              // x_{n,j}
  Tensor s_n_star;
};

/// Iteration 0 draws from every cell with N(0, I) knowns. Later iterations
/// restrict both paired batches to cells covered by both stores, filtered
/// per sample. Throws DataError when nothing is eligible or a coherent cell
/// cannot be found within kMaxResampleAttempts.
BatchTriple select_training_batches(const GlyphDataset& ds, const FeatureStore& z_s,
                                    const FeatureStore& z_c, std::int64_t iteration,
                                    int batch_size, Rng& rng);

/// Style-update cells need a covered content; content-update cells need a
/// covered style.
UpdateBatches select_updating_batches(const GlyphDataset& ds, const FeatureStore& z_s,
                                      const FeatureStore& z_c, std::int64_t iteration,
                                      int batch_size, Rng& rng);

}  // namespace cocoaan
