// Copyright 2026 The normlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "normlab/tensor.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <limits>

#include "normlab/errors.hpp"
#include "oracles.hpp"

namespace normlab {
namespace {

TEST(Tensor4, FromDataValidatesLengthAndFiniteness) {
  EXPECT_THROW(Tensor4::from_data({1, 1, 2, 2}, {1.0, 2.0, 3.0}),
               DimensionError);
  EXPECT_THROW(Tensor4::from_data(
                   {1, 1, 1, 2},
                   {1.0, std::numeric_limits<double>::quiet_NaN()}),
               DimensionError);
  Tensor4 t = Tensor4::from_data({1, 1, 2, 2}, {1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(t.size(), 4u);
  EXPECT_DOUBLE_EQ(t.at(0, 0, 1, 1), 4.0);
}

TEST(ChannelMean, ConstantInput) {
  Tensor4 ones = Tensor4::full({2, 3, 2, 2}, 1.0);
  ChannelVec m = channel_mean(ones);
  ASSERT_EQ(m.size(), 3u);
  for (double v : m) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(ChannelMean, PerChannelConstant) {
  Tensor4 t = Tensor4::zeros({2, 3, 2, 3});
  for (int b = 0; b < t.b(); ++b)
    for (int c = 0; c < t.c(); ++c)
      for (int y = 0; y < t.h(); ++y)
        for (int x = 0; x < t.w(); ++x) t.at(b, c, y, x) = c;
  ChannelVec m = channel_mean(t);
  EXPECT_DOUBLE_EQ(m[0], 0.0);
  EXPECT_DOUBLE_EQ(m[1], 1.0);
  EXPECT_DOUBLE_EQ(m[2], 2.0);
}

TEST(ChannelMean, MatchesLoopOracle) {
  RngStream rng(42);
  Tensor4 t = oracles::random_tensor(rng, {4, 2, 3, 3});
  ChannelVec got = channel_mean(t);
  ChannelVec want = oracles::naive_channel_mean(t);
  for (int c = 0; c < t.c(); ++c) EXPECT_NEAR(got[c], want[c], 1e-12);
}

TEST(ChannelMean, EmptyTensorThrows) {
  EXPECT_THROW(channel_mean(Tensor4::zeros({0, 3, 2, 2})), DimensionError);
  EXPECT_THROW(channel_mean(Tensor4::zeros({2, 3, 0, 2})), DimensionError);
}

TEST(ChannelVar, ConstantTensorIsZero) {
  Tensor4 t = Tensor4::full({3, 2, 2, 2}, 7.5);
  for (double v : channel_var(t)) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(ChannelVar, SymmetricTwoPoint) {
  // Channel holding exactly {+1,-1} equally has biased variance 1.
  Tensor4 t = Tensor4::zeros({2, 1, 1, 2});
  t.at(0, 0, 0, 0) = 1.0;
  t.at(0, 0, 0, 1) = -1.0;
  t.at(1, 0, 0, 0) = -1.0;
  t.at(1, 0, 0, 1) = 1.0;
  EXPECT_DOUBLE_EQ(channel_var(t)[0], 1.0);
}

TEST(ChannelVar, MatchesTwoPassLoopOracle) {
  RngStream rng(7);
  Tensor4 t = oracles::random_tensor(rng, {4, 2, 3, 3});
  ChannelVec got = channel_var(t);
  ChannelVec want = oracles::naive_channel_var(t);
  for (int c = 0; c < t.c(); ++c) EXPECT_NEAR(got[c], want[c], 1e-12);
}

TEST(GlobalAvgPool, SmallExample) {
  Tensor4 t = Tensor4::from_data({1, 1, 2, 2}, {1.0, 2.0, 3.0, 4.0});
  Tensor4 p = global_avg_pool(t);
  EXPECT_EQ(p.dims(), (Dims4{1, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(p.at(0, 0, 0, 0), 2.5);
}

TEST(GlobalAvgPool, ConstantKeepsValue) {
  Tensor4 t = Tensor4::full({2, 3, 4, 5}, -1.25);
  Tensor4 p = global_avg_pool(t);
  EXPECT_EQ(p.dims(), (Dims4{2, 3, 1, 1}));
  for (int b = 0; b < 2; ++b)
    for (int c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(p.at(b, c, 0, 0), -1.25);
}

TEST(GlobalAvgPool, MatchesLoopOracleAndZeroCentering) {
  RngStream rng(11);
  Tensor4 t = oracles::random_tensor(rng, {3, 2, 4, 5});
  Tensor4 got = global_avg_pool(t);
  Tensor4 want = oracles::naive_global_avg_pool(t);
  for (int b = 0; b < t.b(); ++b)
    for (int c = 0; c < t.c(); ++c)
      EXPECT_NEAR(got.at(b, c, 0, 0), want.at(b, c, 0, 0), 1e-12);

  // Subtracting the pooled mean leaves zero spatial mean per (b,c).
  for (int b = 0; b < t.b(); ++b)
    for (int c = 0; c < t.c(); ++c) {
      double s = 0.0;
      for (int y = 0; y < t.h(); ++y)
        for (int x = 0; x < t.w(); ++x)
          s += t.at(b, c, y, x) - got.at(b, c, 0, 0);
      EXPECT_NEAR(s / (t.h() * t.w()), 0.0, 1e-12);
    }
}

TEST(GlobalAvgPool, ZeroSpatialThrows) {
  EXPECT_THROW(global_avg_pool(Tensor4::zeros({1, 1, 0, 3})), DimensionError);
}

TEST(DepthwiseConv3, CenterDeltaIsIdentity) {
  RngStream rng(3);
  Tensor4 t = oracles::random_tensor(rng, {2, 3, 4, 4});
  std::vector<std::array<double, 9>> kernels(3, std::array<double, 9>{});
  for (auto& k : kernels) k[4] = 1.0;
  ChannelVec bias(3, 0.0);
  Tensor4 out = depthwise_conv3(t, kernels, bias);
  for (std::size_t i = 0; i < t.size(); ++i)
    EXPECT_DOUBLE_EQ(out.data()[i], t.data()[i]);
}

TEST(DepthwiseConv3, ZeroPaddingTapCount) {
  Tensor4 t = Tensor4::full({1, 1, 3, 3}, 1.0);
  std::vector<std::array<double, 9>> kernels(1);
  kernels[0].fill(1.0);
  Tensor4 out = depthwise_conv3(t, kernels, ChannelVec{0.0});
  EXPECT_DOUBLE_EQ(out.at(0, 0, 1, 1), 9.0);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 0, 1), 6.0);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 1, 0), 6.0);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 0, 0), 4.0);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 2, 2), 4.0);
}

TEST(DepthwiseConv3, MatchesLoopOracle) {
  RngStream rng(5);
  Tensor4 t = oracles::random_tensor(rng, {2, 4, 5, 7});
  std::vector<std::array<double, 9>> kernels(4);
  for (auto& k : kernels)
    for (double& v : k) v = rng.uniform(-2.0, 2.0);
  ChannelVec bias(4);
  rng.fill_uniform(bias.data(), bias.size(), -1.0, 1.0);
  Tensor4 got = depthwise_conv3(t, kernels, bias);
  Tensor4 want = oracles::naive_depthwise_conv3(t, kernels, bias);
  for (std::size_t i = 0; i < t.size(); ++i)
    EXPECT_NEAR(got.data()[i], want.data()[i], 1e-12);
}

TEST(DepthwiseConv3, LinearityInInputAndKernels) {
  RngStream rng(13);
  Dims4 d{2, 2, 4, 4};
  Tensor4 x = oracles::random_tensor(rng, d, -3.0, 3.0);
  Tensor4 y = oracles::random_tensor(rng, d, -3.0, 3.0);
  std::vector<std::array<double, 9>> kernels(2);
  for (auto& k : kernels)
    for (double& v : k) v = rng.uniform(-1.0, 1.0);
  ChannelVec bias(2, 0.0);
  const double a = 1.75, b = -0.5;

  Tensor4 mix = Tensor4::zeros(d);
  for (std::size_t i = 0; i < mix.size(); ++i)
    mix.data()[i] = a * x.data()[i] + b * y.data()[i];

  Tensor4 lhs = depthwise_conv3(mix, kernels, bias);
  Tensor4 cx = depthwise_conv3(x, kernels, bias);
  Tensor4 cy = depthwise_conv3(y, kernels, bias);
  for (std::size_t i = 0; i < mix.size(); ++i)
    EXPECT_NEAR(lhs.data()[i], a * cx.data()[i] + b * cy.data()[i], 1e-12);
}

TEST(DepthwiseConv3, KernelCountMismatchThrows) {
  Tensor4 t = Tensor4::zeros({1, 2, 3, 3});
  std::vector<std::array<double, 9>> kernels(1);
  EXPECT_THROW(depthwise_conv3(t, kernels, ChannelVec(2, 0.0)),
               DimensionError);
}

TEST(PairwiseCosine, IdenticalSamplesGiveOnes) {
  Tensor4 t = Tensor4::full({3, 2, 2, 2}, 0.5);
  SquareMatrix m = pairwise_cosine_matrix(t);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(m.at(i, j), 1.0, 1e-15);
}

TEST(PairwiseCosine, OrthogonalSamples) {
  Tensor4 t = Tensor4::zeros({2, 1, 1, 4});
  t.at(0, 0, 0, 0) = 1.0;
  t.at(1, 0, 0, 1) = 1.0;
  SquareMatrix m = pairwise_cosine_matrix(t);
  EXPECT_DOUBLE_EQ(m.at(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(m.at(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(m.at(0, 0), 1.0);
}

TEST(PairwiseCosine, MatchesLoopOracle) {
  RngStream rng(23);
  Tensor4 t = oracles::random_tensor(rng, {3, 2, 3, 3});
  SquareMatrix got = pairwise_cosine_matrix(t);
  SquareMatrix want = oracles::naive_cosine_matrix(t);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(got.at(i, j), want.at(i, j), 1e-12);
}

TEST(PairwiseCosine, SymmetricUnitDiagonalBounded) {
  RngStream rng(29);
  for (int rep = 0; rep < 20; ++rep) {
    Tensor4 t = oracles::random_tensor(
        rng, {2 + static_cast<int>(rng.below(4)), 1 + static_cast<int>(rng.below(3)),
              1 + static_cast<int>(rng.below(4)), 1 + static_cast<int>(rng.below(4))});
    SquareMatrix m = pairwise_cosine_matrix(t);
    for (int i = 0; i < m.n(); ++i) {
      EXPECT_DOUBLE_EQ(m.at(i, i), 1.0);
      for (int j = 0; j < m.n(); ++j) {
        EXPECT_DOUBLE_EQ(m.at(i, j), m.at(j, i));
        EXPECT_LE(m.at(i, j), 1.0 + 1e-15);
        EXPECT_GE(m.at(i, j), -1.0 - 1e-15);
      }
    }
  }
}

TEST(PairwiseCosine, ZeroNormSampleFlagged) {
  Tensor4 t = Tensor4::zeros({2, 1, 1, 3});
  t.at(1, 0, 0, 0) = 2.0;
  CosineWarnings w;
  SquareMatrix m = pairwise_cosine_matrix(t, &w);
  EXPECT_EQ(w.zero_norm_samples, 1);
  EXPECT_DOUBLE_EQ(m.at(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(m.at(1, 0), 0.0);
}

}  // namespace
}  // namespace normlab
