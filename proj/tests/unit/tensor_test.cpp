// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "cocoaan/errors.hpp"
#include "cocoaan/gradcheck.hpp"
#include "cocoaan/ops.hpp"
#include "cocoaan/tensor.hpp"
#include "test_util.hpp"

namespace cocoaan {
namespace {

TEST(TensorCreate, ZeroFill) {
  const Tensor t = tensor_create({2, 3}, 0.0);
  ASSERT_EQ(t.shape(), (Shape{2, 3}));
  for (double v : t.data()) EXPECT_EQ(v, 0.0);
}

TEST(TensorCreate, NormalFillIsDeterministic) {
  const Tensor a = tensor_create({128}, NormalFill{}, 7);
  const Tensor b = tensor_create({128}, NormalFill{}, 7);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
}

TEST(TensorCreate, NormalFillMoments) {
  const Tensor t = tensor_create({4, 250000}, NormalFill{}, 3);
  double s = 0, s2 = 0;
  for (double v : t.data()) {
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(t.numel());
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n - (s / n) * (s / n), 1.0, 0.05);
}

TEST(TensorCreate, RejectsBadShapes) {
  EXPECT_THROW(Tensor::zeros({2, -1}), ShapeError);
  EXPECT_THROW(Tensor({2}, {1.0, 2.0, 3.0}), ShapeError);
}

TEST(Backward, SumGivesOnes) {
  Tensor x({3}, {1, 2, 3}, true);
  backward(sum(x));
  ASSERT_EQ(x.grad().size(), 3u);
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, SquareRule) {
  Tensor x({3}, {1, 2, 3}, true);
  backward(sum(x * x));
  EXPECT_EQ(x.grad()[0], 2.0);
  EXPECT_EQ(x.grad()[1], 4.0);
  EXPECT_EQ(x.grad()[2], 6.0);
}

TEST(Backward, SharedSubexpressionAccumulatesOnce) {
  Tensor x({2}, {0.5, -1.5}, true);
  const Tensor y = tanh(x);
  backward(sum(y * y + y));
  for (std::size_t i = 0; i < 2; ++i) {
    const double t = std::tanh(x.data()[i]);
    EXPECT_NEAR(x.grad()[i], (2 * t + 1) * (1 - t * t), 1e-14);
  }
}

TEST(Backward, LeafLossAccumulates) {
  Tensor x({1}, {4.0}, true);
  backward(x);
  backward(x);
  EXPECT_EQ(x.grad()[0], 2.0);
}

TEST(Backward, RejectsNonScalar) {
  Tensor x({2}, {1, 2}, true);
  EXPECT_THROW(backward(x * x), ShapeError);
}

TEST(Backward, DetachBlocksGradient) {
  Tensor x({2}, {1, 2}, true);
  backward(sum(x.detach() * x));
  EXPECT_EQ(x.grad()[0], 1.0);
  EXPECT_EQ(x.grad()[1], 2.0);
}

TEST(Backward, ThreeLayerCompositeMatchesFiniteDifferences) {
  const Tensor x = testing::random_tensor({3, 4}, 1);
  const Tensor w1 = testing::random_tensor({5, 4}, 2, 0.5);
  const Tensor w2 = testing::random_tensor({2, 5}, 3, 0.5);
  const Tensor inputs[] = {x, w1, w2};
  const double err = finite_diff_check(
      [](std::span<const Tensor> in) {
        const Tensor h = tanh(linear(in[0], in[1], Tensor()));
        const Tensor z = leaky_relu(linear(h, in[2], Tensor()), 0.2);
        return mean(z * z);
      },
      inputs);
  EXPECT_LT(err, 1e-4);
}

TEST(FiniteDiffCheck, LinearFunctionOnlyShowsRoundingError) {
  const Tensor x = testing::random_tensor({5}, 4);
  const Tensor inputs[] = {x};
  EXPECT_LT(finite_diff_check([](std::span<const Tensor> in) { return sum(in[0]); }, inputs), 1e-9);
}

TEST(FiniteDiffCheck, TanhCompositeBelowOneInAMillion) {
  const Tensor x = testing::random_tensor({6}, 5);
  const Tensor inputs[] = {x};
  const double err = finite_diff_check(
      [](std::span<const Tensor> in) { return sum(tanh(scale(tanh(in[0]), 1.7))); }, inputs,
      {.eps = 1e-5});
  EXPECT_LT(err, 1e-6);
}

TEST(FiniteDiffCheck, DetectsWrongGradientRule) {
  // A square op whose backward forgets the factor 2.
  auto bad_square = [](const Tensor& a) {
    std::vector<double> out(a.data().begin(), a.data().end());
    for (double& v : out) v *= v;
    const Tensor in = a;
    return make_result(a.shape(), std::move(out), {a}, "bad_square",
                       [in](std::span<const double> g) {
                         auto ga = grad_buffer(in);
                         for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * in.data()[i];
                       });
  };
  const Tensor x = testing::random_tensor({4}, 6);
  const Tensor inputs[] = {x};
  const double err = finite_diff_check(
      [&](std::span<const Tensor> in) { return sum(bad_square(in[0])); }, inputs);
  EXPECT_GT(err, 1e-2);
}

}  // namespace
}  // namespace cocoaan
