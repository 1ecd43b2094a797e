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

#include <cmath>
#include <sstream>

#include "normlab/errors.hpp"
#include "normlab/kernels.hpp"
#include "normlab/logging.hpp"

namespace normlab {

std::string Dims4::str() const {
  std::ostringstream os;
  os << "(" << b << "," << c << "," << h << "," << w << ")";
  return os.str();
}

Tensor4 Tensor4::zeros(Dims4 d) {
  return Tensor4(d, std::vector<double>(d.count(), 0.0));
}

Tensor4 Tensor4::full(Dims4 d, double value) {
  return Tensor4(d, std::vector<double>(d.count(), value));
}

Tensor4 Tensor4::from_data(Dims4 d, std::vector<double> data) {
  if (data.size() != d.count())
    throw DimensionError("Tensor4: data length " + std::to_string(data.size()) +
                         " does not match dims " + d.str());
  for (double v : data)
    if (!std::isfinite(v))
      throw DimensionError("Tensor4: non-finite entry on construction");
  return Tensor4(d, std::move(data));
}

bool Tensor4::has_nonfinite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return true;
  return false;
}

namespace {

void require_nonempty_batch(const Tensor4& x, const char* op) {
  if (static_cast<std::size_t>(x.b()) * x.h() * x.w() == 0 || x.c() == 0)
    throw DimensionError(std::string(op) + ": empty tensor " + x.dims().str());
}

}  // namespace

ChannelVec channel_mean(const Tensor4& x) {
  require_nonempty_batch(x, "channel_mean");
  const std::size_t plane = x.plane_size();
  const double count = static_cast<double>(x.b()) * plane;
  ChannelVec mean(x.c(), 0.0);
  for (int c = 0; c < x.c(); ++c) {
    double s = 0.0;
    for (int b = 0; b < x.b(); ++b) s += kernels::sum(x.plane(b, c), plane);
    mean[c] = s / count;
  }
  return mean;
}

ChannelVec channel_var(const Tensor4& x, const ChannelVec& mean) {
  require_nonempty_batch(x, "channel_var");
  if (mean.size() != static_cast<std::size_t>(x.c()))
    throw DimensionError("channel_var: mean length mismatch");
  const std::size_t plane = x.plane_size();
  const double count = static_cast<double>(x.b()) * plane;
  ChannelVec var(x.c(), 0.0);
  for (int c = 0; c < x.c(); ++c) {
    double s = 0.0;
    for (int b = 0; b < x.b(); ++b)
      s += kernels::sumsq_centered(x.plane(b, c), plane, mean[c]);
    var[c] = s / count;
  }
  return var;
}

ChannelVec channel_var(const Tensor4& x) {
  return channel_var(x, channel_mean(x));
}

Tensor4 global_avg_pool(const Tensor4& x) {
  if (x.plane_size() == 0)
    throw DimensionError("global_avg_pool: zero spatial extent " +
                         x.dims().str());
  const std::size_t plane = x.plane_size();
  Tensor4 out = Tensor4::zeros({x.b(), x.c(), 1, 1});
  for (int b = 0; b < x.b(); ++b)
    for (int c = 0; c < x.c(); ++c)
      out.at(b, c, 0, 0) = kernels::sum(x.plane(b, c), plane) / plane;
  return out;
}

Tensor4 depthwise_conv3(const Tensor4& x,
                        const std::vector<std::array<double, 9>>& kernels_by_c,
                        const ChannelVec& bias) {
  if (kernels_by_c.size() != static_cast<std::size_t>(x.c()))
    throw DimensionError("depthwise_conv3: kernel count " +
                         std::to_string(kernels_by_c.size()) +
                         " != channels " + std::to_string(x.c()));
  if (bias.size() != static_cast<std::size_t>(x.c()))
    throw DimensionError("depthwise_conv3: bias length mismatch");
  Tensor4 out = Tensor4::zeros(x.dims());
  const std::size_t plane = x.plane_size();
  for (int b = 0; b < x.b(); ++b) {
    for (int c = 0; c < x.c(); ++c) {
      double* o = out.plane(b, c);
      for (std::size_t i = 0; i < plane; ++i) o[i] = bias[c];
      kernels::conv3x3_acc(x.plane(b, c), x.h(), x.w(),
                           kernels_by_c[c].data(), o);
    }
  }
  return out;
}

SquareMatrix pairwise_cosine_matrix(const Tensor4& x,
                                    CosineWarnings* warnings) {
  if (x.b() < 1)
    throw DimensionError("pairwise_cosine_matrix: empty batch");
  const int n = x.b();
  const std::size_t len = x.sample_size();
  std::vector<double> norms(n);
  int zero_norms = 0;
  for (int i = 0; i < n; ++i) {
    norms[i] = std::sqrt(kernels::dot(x.sample(i), x.sample(i), len));
    if (norms[i] == 0.0) ++zero_norms;
  }
  if (zero_norms > 0) {
    if (warnings) warnings->zero_norm_samples = zero_norms;
    warn("pairwise_cosine_matrix: " + std::to_string(zero_norms) +
         " zero-norm sample(s), similarity forced to 0");
  }
  SquareMatrix m(n);
  for (int i = 0; i < n; ++i) {
    m.at(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      double cosine = 0.0;
      if (norms[i] != 0.0 && norms[j] != 0.0) {
        cosine = kernels::dot(x.sample(i), x.sample(j), len) /
                 (norms[i] * norms[j]);
      }
      m.at(i, j) = cosine;
      m.at(j, i) = cosine;
    }
  }
  return m;
}

}  // namespace normlab
