// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "cocoaan/checkpoint.hpp"
#include "cocoaan/errors.hpp"
#include "test_util.hpp"

namespace cocoaan {
namespace {

TrainConfig config() {
  TrainConfig cfg;
  cfg.scale = {16, 8, 1.0 / 64};
  cfg.batch_size = 4;
  cfg.iterations = 4;
  cfg.seed = 5;
  return cfg;
}

GlyphDataset dataset() {
  SynthConfig s;
  s.n_styles = 4;
  s.n_contents = 5;
  s.resolution = 16;
  return synth_dataset(s);
}

std::string log_of(const std::vector<MetricRow>& rows) {
  std::string out;
  for (const auto& r : rows) out += format_metric_row(r, false) + "\n";
  return out;
}

TEST(Checkpoint, EncodeDecodeEncodeIsStable) {
  const GlyphDataset ds = dataset();
  TrainState st = init_train_state(config(), ds.manifest());
  st.config.iterations = 2;
  train(st, ds);
  const std::string bytes = encode_checkpoint(st);
  TrainState back = decode_checkpoint(bytes);
  EXPECT_EQ(encode_checkpoint(back), bytes);
  EXPECT_EQ(back.iteration, 2);
  EXPECT_EQ(back.rng, st.rng);
  EXPECT_EQ(back.z_s, st.z_s);
  EXPECT_EQ(back.z_c, st.z_c);
  EXPECT_EQ(back.adam_d, st.adam_d);
  EXPECT_EQ(back.manifest, st.manifest);
  EXPECT_EQ(back.config, st.config);
  EXPECT_EQ(parameter_hash(back.nets.g), parameter_hash(st.nets.g));
}

TEST(Checkpoint, ResumeMatchesUninterruptedRunBitwise) {
  const GlyphDataset ds = dataset();
  TrainState full = init_train_state(config(), ds.manifest());
  const auto full_rows = train(full, ds);

  testing::TempDir dir("resume");
  TrainState first = init_train_state(config(), ds.manifest());
  first.config.iterations = 2;
  auto rows = train(first, ds);
  save_checkpoint(first, dir.path() / "mid.bin");
  TrainState resumed = load_checkpoint(dir.path() / "mid.bin");
  resumed.config.iterations = 4;
  const auto rest = train(resumed, ds);
  rows.insert(rows.end(), rest.begin(), rest.end());

  EXPECT_EQ(log_of(rows), log_of(full_rows));
  EXPECT_EQ(parameter_hash(resumed.nets.g), parameter_hash(full.nets.g));
  EXPECT_EQ(parameter_hash(resumed.nets.d), parameter_hash(full.nets.d));
  EXPECT_EQ(resumed.z_s, full.z_s);
}

TEST(Checkpoint, PeriodicCheckpointsAreWritten) {
  const GlyphDataset ds = dataset();
  TrainConfig cfg = config();
  cfg.checkpoint_every = 2;
  TrainState st = init_train_state(cfg, ds.manifest());
  testing::TempDir dir("periodic");
  TrainRunOptions opts;
  opts.checkpoint_dir = dir.path();
  train(st, ds, opts);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "ckpt_2.bin"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "ckpt_4.bin"));
  EXPECT_EQ(load_checkpoint(dir.path() / "latest.bin").iteration, 4);
}

TEST(Checkpoint, RejectsCorruption) {
  const GlyphDataset ds = dataset();
  const TrainState st = init_train_state(config(), ds.manifest());
  const std::string bytes = encode_checkpoint(st);

  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  EXPECT_THROW(decode_checkpoint(flipped), CheckpointError);

  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 9)), CheckpointError);

  std::string magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(magic), CheckpointError);

  EXPECT_THROW(load_checkpoint("/nonexistent/ckpt.bin"), CheckpointError);
}

TEST(Checkpoint, HeaderLayout) {
  const GlyphDataset ds = dataset();
  const std::string bytes = encode_checkpoint(init_train_state(config(), ds.manifest()));
  EXPECT_EQ(bytes.substr(0, 8), std::string("COCOAAN\0", 8));
  // Version 1, little-endian u32.
  EXPECT_EQ(bytes[8], 1);
  EXPECT_EQ(bytes[9], 0);
  EXPECT_EQ(bytes[10], 0);
  EXPECT_EQ(bytes[11], 0);
}

}  // namespace
}  // namespace cocoaan
