// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "cocoaan/errors.hpp"
#include "cocoaan/gradcheck.hpp"
#include "cocoaan/networks.hpp"
#include "cocoaan/objectives.hpp"
#include "cocoaan/ops.hpp"
#include "test_util.hpp"

namespace cocoaan {
namespace {

using testing::random_tensor;

const NetScale kDesk{32, 16, 0.25};
const NetScale kTiny{8, 3, 1.0 / 64};

ForwardOptions probe_options() {
  ForwardOptions o = ForwardOptions::frozen();
  o.track_params = true;
  return o;
}

ShapePlan rows(std::initializer_list<std::pair<const char*, Shape>> list) {
  ShapePlan out;
  for (const auto& [label, shape] : list) out.push_back({label, shape});
  return out;
}

TEST(NetScale, ValidatesResolutionAndChannels) {
  EXPECT_NO_THROW(NetScale{}.validate());
  EXPECT_NO_THROW(kDesk.validate());
  EXPECT_THROW((NetScale{48, 16, 1.0}).validate(), ConfigError);
  EXPECT_THROW((NetScale{256, 16, 1.0}).validate(), ConfigError);
  EXPECT_THROW((NetScale{4, 16, 1.0}).validate(), ConfigError);
  EXPECT_THROW((NetScale{32, 16, 1.0 / 3}).validate(), ConfigError);
  EXPECT_THROW((NetScale{32, 16, 1.0 / 128}).validate(), ConfigError);
  EXPECT_THROW((NetScale{32, 0, 1.0}).validate(), ConfigError);
}

TEST(GeneratorPlan, DeskScaleHasThreeUpsamplingSteps) {
  const GeneratorParams g = build_generator(kDesk, 1);
  EXPECT_EQ(g.plan, rows({{"style_stem", {128, 4, 4}},
                          {"content_stem", {128, 4, 4}},
                          {"concat", {256, 4, 4}},
                          {"up1", {256, 8, 8}},
                          {"up2", {128, 16, 16}},
                          {"head", {1, 32, 32}}}));
  ShapeTrace trace;
  const Tensor y = generator_forward(g, random_tensor({2, 16}, 2), random_tensor({2, 16}, 3),
                                     ForwardOptions::inference(), &trace);
  EXPECT_EQ(trace, g.plan);
  EXPECT_EQ(y.shape(), (Shape{2, 1, 32, 32}));
}

TEST(GeneratorForward, OutputInOpenUnitRangeAndDeterministic) {
  const GeneratorParams g = build_generator(kDesk, 4);
  const Tensor s = random_tensor({3, 16}, 5, 3.0), c = random_tensor({3, 16}, 6, 3.0);
  const Tensor a = generator_forward(g, s, c, ForwardOptions::inference());
  const Tensor b = generator_forward(g, s, c, ForwardOptions::inference());
  EXPECT_EQ(testing::max_abs_diff(a.data(), b.data()), 0.0);
  for (double v : a.data()) {
    EXPECT_GT(v, -1.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(GeneratorForward, StyleGradientIsNonzero) {
  const GeneratorParams g = build_generator(kDesk, 7);
  const Tensor s = random_tensor({2, 16}, 8).set_requires_grad(true);
  const Tensor c = random_tensor({2, 16}, 9);
  backward(sum(generator_forward(g, s, c, ForwardOptions::frozen())));
  double norm = 0.0;
  for (double v : s.grad()) norm += v * v;
  EXPECT_GT(norm, 0.0);
}

TEST(GeneratorForward, RejectsMismatchedCodes) {
  const GeneratorParams g = build_generator(kDesk, 1);
  EXPECT_THROW(generator_forward(g, Tensor::zeros({2, 16}), Tensor::zeros({2, 8}),
                                 ForwardOptions::inference()),
               ShapeError);
}

TEST(EncoderPlan, DeskScaleShapes) {
  const EncoderParams e = build_encoder(kDesk, 1);
  EXPECT_EQ(e.net.plan, rows({{"stage1", {64, 16, 16}},
                              {"stage2", {128, 8, 8}},
                              {"stage3", {256, 4, 4}},
                              {"head", {16}}}));
  ShapeTrace trace;
  const Tensor y = encoder_forward(e, random_tensor({4, 1, 32, 32}, 2), random_tensor({4, 16}, 3),
                                   ForwardOptions::inference(), &trace);
  EXPECT_EQ(trace, e.net.plan);
  EXPECT_EQ(y.shape(), (Shape{4, 16}));
}

TEST(EncoderPlan, FcAddOnFirstThreeStagesOnly) {
  const EncoderParams e = build_encoder(NetScale{128, 128, 0.125}, 1);
  ASSERT_EQ(e.net.stages.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(e.net.stages[k].condition.has_value(), k < 3);
}

TEST(EncoderForward, ConditionPathIsLive) {
  const EncoderParams e = build_encoder(kDesk, 2);
  const Tensor x = random_tensor({2, 1, 32, 32}, 3);
  const Tensor a = encoder_forward(e, x, random_tensor({2, 16}, 4), ForwardOptions::inference());
  const Tensor b = encoder_forward(e, x, random_tensor({2, 16}, 5), ForwardOptions::inference());
  EXPECT_GT(testing::max_abs_diff(a.data(), b.data()), 0.0);
}

TEST(EncoderForward, RejectsWrongResolution) {
  const EncoderParams e = build_encoder(kDesk, 2);
  EXPECT_THROW(encoder_forward(e, Tensor::zeros({1, 1, 16, 16}), Tensor::zeros({1, 16}),
                               ForwardOptions::inference()),
               ShapeError);
}

TEST(DiscriminatorPlan, DeskScaleShapes) {
  const DiscriminatorParams d = build_discriminator(kDesk, 1);
  EXPECT_EQ(d.net.plan, rows({{"stage1", {128, 16, 16}},
                              {"stage2", {128, 8, 8}},
                              {"stage3", {256, 4, 4}},
                              {"head", {1}}}));
  EXPECT_EQ(d.net.cond_dim, 32);
  const Tensor y = discriminator_forward(d, random_tensor({3, 1, 32, 32}, 2), random_tensor({3, 16}, 3),
                                         random_tensor({3, 16}, 4), ForwardOptions::inference());
  EXPECT_EQ(y.shape(), (Shape{3}));
}

TEST(DiscriminatorForward, SwappingStyleCodesChangesLogits) {
  const DiscriminatorParams d = build_discriminator(kDesk, 5);
  const Tensor x = random_tensor({2, 1, 32, 32}, 6);
  const Tensor s = random_tensor({2, 16}, 7);
  const Tensor c = random_tensor({2, 16}, 8);
  const Tensor swapped = concat(std::vector<Tensor>{narrow(s, 0, 1, 1), narrow(s, 0, 0, 1)}, 0);
  const Tensor a = discriminator_forward(d, x, s, c, ForwardOptions::inference());
  const Tensor b = discriminator_forward(d, x, swapped, c, ForwardOptions::inference());
  EXPECT_NE(a.data()[0], b.data()[0]);
}

TEST(DiscriminatorForward, GradientsReachImagesCodesAndParameters) {
  DiscriminatorParams d = build_discriminator(kDesk, 9);
  const Tensor x = random_tensor({2, 1, 32, 32}, 10).set_requires_grad(true);
  const Tensor s = random_tensor({2, 16}, 11).set_requires_grad(true);
  const Tensor c = random_tensor({2, 16}, 12).set_requires_grad(true);
  backward(sum(discriminator_forward(d, x, s, c, probe_options())));
  for (const Tensor* t : {&x, &s, &c}) {
    double norm = 0.0;
    for (double v : t->grad()) norm += v * v;
    EXPECT_GT(norm, 0.0);
  }
  for (auto& p : parameters(d)) EXPECT_TRUE(p.has_grad());
}

TEST(StateEntries, NamesAreUniqueAndHashTracksChanges) {
  GeneratorParams g = build_generator(kDesk, 1);
  auto entries = state_entries(g);
  std::set<std::string> names;
  for (const auto& e : entries) names.insert(e.name);
  EXPECT_EQ(names.size(), entries.size());
  const auto h0 = parameter_hash(g);
  EXPECT_EQ(h0, parameter_hash(g));
  g.up_bn[0].running_mean[0] += 1e-3;
  EXPECT_NE(h0, parameter_hash(g));
}

TEST(Builders, SameSeedSameParameters) {
  auto a = build_encoder(kDesk, 5), b = build_encoder(kDesk, 5), c = build_encoder(kDesk, 6);
  EXPECT_EQ(parameter_hash(a), parameter_hash(b));
  EXPECT_NE(parameter_hash(a), parameter_hash(c));
}

TEST(Builders, SpectralNormOnEveryEncoderAndDiscriminatorWeight) {
  auto e = build_encoder(kDesk, 1);
  for (const auto& st : e.net.stages) {
    EXPECT_TRUE(st.conv.spectral.has_value());
    if (st.condition) EXPECT_TRUE(st.condition->spectral.has_value());
  }
  EXPECT_TRUE(e.net.head.spectral.has_value());
  const auto g = build_generator(kDesk, 1);
  EXPECT_FALSE(g.head.spectral.has_value());
}

TEST(EndToEnd, CompositeObjectiveMatchesFiniteDifferences) {
  GeneratorParams g = build_generator(kTiny, 1);
  EncoderParams s_net = build_encoder(kTiny, 2);
  EncoderParams c_net = build_encoder(kTiny, 3);
  DiscriminatorParams d = build_discriminator(kTiny, 4);
  const Tensor x_style = random_tensor({3, 1, 8, 8}, 5, 0.5);
  const Tensor x_content = random_tensor({3, 1, 8, 8}, 6, 0.5);
  const Tensor x_real = random_tensor({3, 1, 8, 8}, 7, 0.5);
  const Tensor c_known = random_tensor({3, 3}, 8);
  const Tensor s_known = random_tensor({3, 3}, 9);

  std::vector<Tensor> leaves;
  for (auto& p : parameters(g)) leaves.push_back(p);
  for (auto& p : parameters(s_net)) leaves.push_back(p);
  for (auto& p : parameters(c_net)) leaves.push_back(p);
  for (auto& p : parameters(d)) leaves.push_back(p);
  const auto opts = probe_options();
  const double err = finite_diff_check_leaves(
      [&] {
        const Tensor s = encoder_forward(std::as_const(s_net), x_style, c_known, opts);
        const Tensor c = encoder_forward(std::as_const(c_net), x_content, s_known, opts);
        const Tensor fake = generator_forward(std::as_const(g), s, c, opts);
        const Tensor logits = discriminator_forward(std::as_const(d), fake, s, c, opts);
        return gen_step_loss(logits, fake, x_real).total;
      },
      leaves, {.eps = 1e-5, .max_coords_per_tensor = 24, .seed = 3});
  EXPECT_LT(err, 1e-4);
}

}  // namespace
}  // namespace cocoaan
