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

// Brute-force reference implementations used only by tests. Everything here
// is written as plain nested loops with no shared code paths with the
// library, so it can serve as an independent oracle.

#ifndef NORMLAB_TESTS_ORACLES_HPP_
#define NORMLAB_TESTS_ORACLES_HPP_

#include <array>
#include <cmath>
#include <vector>

#include "normlab/rng.hpp"
#include "normlab/tensor.hpp"

namespace normlab::oracles {

inline ChannelVec naive_channel_mean(const Tensor4& x) {
  ChannelVec out(x.c(), 0.0);
  for (int c = 0; c < x.c(); ++c) {
    double s = 0.0;
    long n = 0;
    for (int b = 0; b < x.b(); ++b)
      for (int y = 0; y < x.h(); ++y)
        for (int xx = 0; xx < x.w(); ++xx) {
          s += x.at(b, c, y, xx);
          ++n;
        }
    out[c] = s / n;
  }
  return out;
}

inline ChannelVec naive_channel_var(const Tensor4& x) {
  ChannelVec mean = naive_channel_mean(x);
  ChannelVec out(x.c(), 0.0);
  for (int c = 0; c < x.c(); ++c) {
    double s = 0.0;
    long n = 0;
    for (int b = 0; b < x.b(); ++b)
      for (int y = 0; y < x.h(); ++y)
        for (int xx = 0; xx < x.w(); ++xx) {
          double d = x.at(b, c, y, xx) - mean[c];
          s += d * d;
          ++n;
        }
    out[c] = s / n;
  }
  return out;
}

inline Tensor4 naive_global_avg_pool(const Tensor4& x) {
  Tensor4 out = Tensor4::zeros({x.b(), x.c(), 1, 1});
  for (int b = 0; b < x.b(); ++b)
    for (int c = 0; c < x.c(); ++c) {
      double s = 0.0;
      for (int y = 0; y < x.h(); ++y)
        for (int xx = 0; xx < x.w(); ++xx) s += x.at(b, c, y, xx);
      out.at(b, c, 0, 0) = s / (x.h() * x.w());
    }
  return out;
}

inline Tensor4 naive_depthwise_conv3(
    const Tensor4& x, const std::vector<std::array<double, 9>>& kernels,
    const ChannelVec& bias) {
  Tensor4 out = Tensor4::zeros(x.dims());
  for (int b = 0; b < x.b(); ++b)
    for (int c = 0; c < x.c(); ++c)
      for (int y = 0; y < x.h(); ++y)
        for (int xx = 0; xx < x.w(); ++xx) {
          double acc = bias[c];
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              int sy = y + dy;
              int sx = xx + dx;
              if (sy < 0 || sy >= x.h() || sx < 0 || sx >= x.w()) continue;
              acc += kernels[c][(dy + 1) * 3 + (dx + 1)] * x.at(b, c, sy, sx);
            }
          out.at(b, c, y, xx) = acc;
        }
  return out;
}

inline SquareMatrix naive_cosine_matrix(const Tensor4& x) {
  const int n = x.b();
  SquareMatrix m(n);
  auto flat_dot = [&](int i, int j) {
    double s = 0.0;
    for (int c = 0; c < x.c(); ++c)
      for (int y = 0; y < x.h(); ++y)
        for (int xx = 0; xx < x.w(); ++xx)
          s += x.at(i, c, y, xx) * x.at(j, c, y, xx);
    return s;
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        m.at(i, j) = 1.0;
        continue;
      }
      double ni = std::sqrt(flat_dot(i, i));
      double nj = std::sqrt(flat_dot(j, j));
      m.at(i, j) = (ni == 0.0 || nj == 0.0) ? 0.0 : flat_dot(i, j) / (ni * nj);
    }
  return m;
}

/// Mean off-diagonal cosine over all ordered pairs i != j.
inline double naive_condensation_score(const Tensor4& x) {
  SquareMatrix m = naive_cosine_matrix(x);
  const int n = m.n();
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) s += m.at(i, j);
  return s / (static_cast<double>(n) * (n - 1));
}

/// Straight-line application of per-channel normalization with given stats
/// plus gamma/beta affine.
inline Tensor4 naive_bn_apply(const Tensor4& x, const ChannelVec& mu,
                              const ChannelVec& var, const ChannelVec& gamma,
                              const ChannelVec& beta, double eps) {
  Tensor4 out = Tensor4::zeros(x.dims());
  for (int b = 0; b < x.b(); ++b)
    for (int c = 0; c < x.c(); ++c)
      for (int y = 0; y < x.h(); ++y)
        for (int xx = 0; xx < x.w(); ++xx) {
          double xhat = (x.at(b, c, y, xx) - mu[c]) / std::sqrt(var[c] + eps);
          out.at(b, c, y, xx) = xhat * gamma[c] + beta[c];
        }
  return out;
}

inline Tensor4 random_tensor(RngStream& rng, Dims4 d, double lo = -10.0,
                             double hi = 10.0) {
  Tensor4 t = Tensor4::zeros(d);
  rng.fill_uniform(t.data(), t.size(), lo, hi);
  return t;
}

}  // namespace normlab::oracles

#endif  // NORMLAB_TESTS_ORACLES_HPP_
