// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "cocoaan/dataset.hpp"
#include "cocoaan/feature_store.hpp"
#include "cocoaan/networks.hpp"
#include "cocoaan/ops.hpp"
#include "cocoaan/trainer.hpp"

namespace cocoaan {
namespace {

Tensor randn(const Shape& shape, std::uint64_t seed) {
  Rng rng(seed);
  return Tensor::randn(shape, rng);
}

Precision precision_arg(const benchmark::State& state) {
  return state.range(0) == 32 ? Precision::f32 : Precision::f64;
}

// Desk-scale discriminator stage 2: 128 -> 128 channels, 16 -> 8.
void BM_Conv2dForwardBackward(benchmark::State& state) {
  const Tensor x = randn({32, 128, 16, 16}, 1);
  Tensor w = randn({128, 128, 4, 4}, 2).set_requires_grad(true);
  const Precision p = precision_arg(state);
  for (auto _ : state) {
    const Tensor y = conv2d(x, w, Tensor(), 2, 1, p);
    backward(sum(y));
    w.zero_grad();
  }
}
BENCHMARK(BM_Conv2dForwardBackward)->Arg(64)->Arg(32)->Unit(benchmark::kMillisecond);

// Desk-scale generator up-step: 256 -> 128 channels, 8 -> 16.
void BM_ConvTranspose2dForward(benchmark::State& state) {
  const Tensor x = randn({32, 256, 8, 8}, 3);
  const Tensor w = randn({256, 128, 4, 4}, 4);
  const Precision p = precision_arg(state);
  for (auto _ : state) benchmark::DoNotOptimize(conv_transpose2d(x, w, Tensor(), 2, 1, p));
}
BENCHMARK(BM_ConvTranspose2dForward)->Arg(64)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_UpdateStore(benchmark::State& state) {
  FeatureStore store(StoreRole::content, 16);
  std::vector<Id> keys(32);
  for (std::size_t i = 0; i < keys.size(); ++i) keys[i] = static_cast<Id>(i % 12);
  const Tensor codes = randn({32, 16}, 5);
  for (auto _ : state) update_store(store, keys, codes);
}
BENCHMARK(BM_UpdateStore);

// One full training iteration at desk scale (10 x 20 synthetic, 32px).
void BM_TrainIteration(benchmark::State& state) {
  SynthConfig sc;
  const GlyphDataset ds = synth_dataset(sc);
  TrainConfig cfg;
  cfg.scale = {32, 16, 0.25};
  cfg.batch_size = 32;
  cfg.iterations = 1 << 30;
  cfg.precision = precision_arg(state);
  TrainState st = init_train_state(cfg, ds.manifest());
  for (auto _ : state) benchmark::DoNotOptimize(train_iteration(st, ds));
}
BENCHMARK(BM_TrainIteration)->Arg(64)->Arg(32)->Unit(benchmark::kMillisecond)->Iterations(5);

}  // namespace
}  // namespace cocoaan

BENCHMARK_MAIN();
