// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cocoaan/errors.hpp"
#include "cocoaan/evaluation.hpp"
#include "cocoaan/image_io.hpp"
#include "cocoaan/objectives.hpp"
#include "test_util.hpp"

namespace cocoaan {
namespace {

class EvaluationTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SynthConfig s;
    s.n_styles = 4;
    s.n_contents = 5;
    s.resolution = 16;
    ds_ = new GlyphDataset(synth_dataset(s));
    TrainConfig cfg;
    cfg.scale = {16, 8, 1.0 / 64};
    cfg.batch_size = 8;
    cfg.iterations = 3;
    state_ = new TrainState(init_train_state(cfg, ds_->manifest()));
    train(*state_, *ds_);
  }
  static void TearDownTestSuite() {
    delete state_;
    delete ds_;
  }

  static Tensor glyphs(std::initializer_list<CellKey> keys) {
    std::vector<CellKey> k(keys);
    return ds_->batch(k);
  }

  static std::vector<double> single_style(const Tensor& x, Id content) {
    const Id k[] = {content};
    return learn_new_style(*state_, x, k);
  }

  static GlyphDataset* ds_;
  static TrainState* state_;
};

GlyphDataset* EvaluationTest::ds_ = nullptr;
TrainState* EvaluationTest::state_ = nullptr;

std::vector<CellKey> covered(const TrainState& st, const GlyphDataset& ds) {
  std::vector<CellKey> out;
  for (const auto& k : ds.cells())
    if (st.z_s.contains(k.style) && st.z_c.contains(k.content)) out.push_back(k);
  return out;
}

TEST_F(EvaluationTest, ReconstructScoresAndWritesImages) {
  const auto keys = covered(*state_, *ds_);
  ASSERT_FALSE(keys.empty());
  testing::TempDir dir("recon");
  const EvalReport r = reconstruct(*state_, *ds_, keys, dir.path());
  ASSERT_EQ(r.rows.size(), keys.size());
  double sum = 0;
  for (const auto& row : r.rows) {
    EXPECT_GE(row.l1, 0.0);
    EXPECT_LE(row.l1, 2.0);
    EXPECT_TRUE(std::filesystem::exists(row.image_path));
    sum += row.l1;
  }
  EXPECT_NEAR(r.mean_l1, sum / static_cast<double>(r.rows.size()), 1e-15);
  EvalReport copy = r;
  summarize(copy);
  EXPECT_EQ(copy.median_l1, r.median_l1);

  // Per-row score equals the generated-vs-truth L1 recomputed directly.
  const CellKey k = keys.front();
  const Id s[] = {k.style};
  const Id c[] = {k.content};
  Rng unused;
  const Tensor fake = generate(*state_, known_codes(state_->z_s, s, 1, unused),
                               known_codes(state_->z_c, c, 1, unused));
  EXPECT_NEAR(r.rows.front().l1, mean_l1(fake, glyphs({k})), 1e-15);
}

TEST_F(EvaluationTest, ReconstructListsUncoveredKeys) {
  const CellKey bad[] = {{0, 0}, {99, 0}};
  try {
    reconstruct(*state_, *ds_, bad);
    FAIL();
  } catch (const StoreMissError& e) {
    EXPECT_NE(std::string(e.what()).find("(99,0)"), std::string::npos);
  }
}

TEST_F(EvaluationTest, SummaryOfKnownRows) {
  EvalReport r;
  r.rows = {{{0, 0}, 2.0, ""}, {{0, 1}, 0.0, ""}, {{0, 2}, 1.0, ""}, {{0, 3}, 3.0, ""}};
  summarize(r);
  EXPECT_EQ(r.mean_l1, 1.5);
  EXPECT_EQ(r.median_l1, 1.5);
  std::ostringstream csv;
  write_report_csv(r, csv);
  EXPECT_EQ(csv.str().substr(0, 31), "style_id,content_id,l1,image\n0,");
}

TEST_F(EvaluationTest, NewStyleSingleGlyphEqualsExtraction) {
  const Id content = state_->z_c.entries().begin()->first;
  const Tensor x = glyphs({{1, content}});
  const std::vector<double> code = single_style(x, content);
  const Id k[] = {content};
  Rng unused;
  const Tensor direct = encoder_forward(state_->nets.s, x, known_codes(state_->z_c, k, 1, unused),
                                        ForwardOptions::inference());
  EXPECT_EQ(testing::max_abs_diff(code, direct.data()), 0.0);
}

TEST_F(EvaluationTest, NewStyleDuplicateAndLoopOracle) {
  std::vector<Id> contents;
  for (const auto& [id, v] : state_->z_c.entries()) contents.push_back(id);
  const Id c0 = contents.front();
  const Tensor one = glyphs({{2, c0}});
  const Tensor two = glyphs({{2, c0}, {2, c0}});
  const Id dup[] = {c0, c0};
  EXPECT_LT(testing::max_abs_diff(learn_new_style(*state_, two, dup), single_style(one, c0)), 1e-12);

  std::vector<CellKey> keys;
  for (Id c : contents) keys.push_back({3, c});
  const auto mean = learn_new_style(*state_, ds_->batch(keys), contents);
  std::vector<double> oracle(mean.size(), 0.0);
  for (const auto& k : keys) {
    const auto v = single_style(glyphs({k}), k.content);
    for (std::size_t i = 0; i < v.size(); ++i) oracle[i] += v[i] / static_cast<double>(keys.size());
  }
  EXPECT_LT(testing::max_abs_diff(mean, oracle), 1e-12);
}

TEST_F(EvaluationTest, NewStyleUncoveredContentIsStoreMiss) {
  const Id k[] = {1000};
  EXPECT_THROW(learn_new_style(*state_, glyphs({{0, 0}}), k), StoreMissError);
}

TEST_F(EvaluationTest, NewContentMeansMatchGroupOracle) {
  std::vector<Id> styles;
  for (const auto& [id, v] : state_->z_s.entries()) styles.push_back(id);
  ASSERT_GE(styles.size(), 2u);
  const Id s0 = styles[0], s1 = styles[1];
  const Tensor x = glyphs({{s0, 0}, {s1, 0}, {s0, 1}, {s1, 1}, {s0, 1}});
  const Id style_keys[] = {s0, s1, s0, s1, s0};
  const Id new_ids[] = {50, 50, 51, 51, 51};
  const auto codes = learn_new_content(*state_, x, style_keys, new_ids);
  ASSERT_EQ(codes.size(), 2u);

  auto one = [&](CellKey k, Id style) {
    const Id s[] = {style};
    const Id n[] = {0};
    return learn_new_content(*state_, glyphs({k}), s, n).at(0);
  };
  const auto a = one({s0, 0}, s0), b = one({s1, 0}, s1);
  const auto c = one({s0, 1}, s0), d = one({s1, 1}, s1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(codes.at(50)[i], (a[i] + b[i]) / 2.0, 1e-12);
    EXPECT_NEAR(codes.at(51)[i], (c[i] + d[i] + c[i]) / 3.0, 1e-12);
  }
  const Id bad[] = {999};
  const Id n[] = {0};
  EXPECT_THROW(learn_new_content(*state_, glyphs({{0, 0}}), bad, n), StoreMissError);
}

TEST_F(EvaluationTest, InterpolationEndpointsAndConstantPath) {
  const auto& s_a = state_->z_s.entries().begin()->second;
  const auto& s_b = state_->z_s.entries().rbegin()->second;
  const auto& c = state_->z_c.entries().begin()->second;
  const Tensor frames = interpolate_style(*state_, s_a, s_b, c, 5);
  ASSERT_EQ(frames.shape(), (Shape{5, 1, 16, 16}));
  const auto d = static_cast<std::int64_t>(c.size());
  const Tensor start = generate(*state_, Tensor({1, d}, s_a), Tensor({1, d}, c));
  EXPECT_LT(testing::max_abs_diff(frames.data().subspan(0, 256), start.data()), 1e-12);

  const Tensor same = interpolate_style(*state_, s_a, s_a, c, 4);
  for (int k = 1; k < 4; ++k) {
    EXPECT_LT(testing::max_abs_diff(same.data().subspan(k * 256, 256), same.data().subspan(0, 256)),
              1e-12);
  }
  EXPECT_THROW(interpolate_style(*state_, s_a, s_b, c, 1), ConfigError);
  const std::vector<double> short_code(3, 0.0);
  EXPECT_THROW(interpolate_style(*state_, short_code, s_b, c, 3), ShapeError);
}

TEST_F(EvaluationTest, ExportIsStableAndRowCountMatchesCoverage) {
  testing::TempDir dir("export");
  export_embeddings(*state_, StoreRole::style, dir.path() / "a.csv");
  export_embeddings(*state_, StoreRole::style, dir.path() / "b.csv");
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  const std::string a = slurp(dir.path() / "a.csv");
  EXPECT_EQ(a, slurp(dir.path() / "b.csv"));
  EXPECT_EQ(static_cast<std::size_t>(std::count(a.begin(), a.end(), '\n')), state_->z_s.size());
  std::istringstream in(a);
  EXPECT_EQ(read_store_csv(in), state_->z_s);

  TrainState empty = init_train_state(state_->config, state_->manifest);
  EXPECT_THROW(export_embeddings(empty, StoreRole::content, dir.path() / "c.csv"), DataError);
}

}  // namespace
}  // namespace cocoaan
