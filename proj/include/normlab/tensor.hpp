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

#ifndef NORMLAB_TENSOR_HPP_
#define NORMLAB_TENSOR_HPP_

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace normlab {

/// Per-channel quantity (mean, variance, gamma, ...). Length must equal the
/// channel count of the tensor it describes.
using ChannelVec = std::vector<double>;

struct Dims4 {
  int b = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(b) * c * h * w;
  }
  bool operator==(const Dims4&) const = default;
  std::string str() const;
};

/// Dense rank-4 array in NCHW order, row-major, double precision.
/// Data is contiguous: index(b,c,y,x) = ((b*C + c)*H + y)*W + x, so one
/// (b,c) plane is H*W contiguous doubles and one sample is C*H*W.
class Tensor4 {
 public:
  Tensor4() = default;

  static Tensor4 zeros(Dims4 d);
  static Tensor4 full(Dims4 d, double value);
  /// Takes ownership of `data`; validates length and rejects NaN/Inf entries.
  static Tensor4 from_data(Dims4 d, std::vector<double> data);

  const Dims4& dims() const { return dims_; }
  int b() const { return dims_.b; }
  int c() const { return dims_.c; }
  int h() const { return dims_.h; }
  int w() const { return dims_.w; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t plane_size() const {
    return static_cast<std::size_t>(dims_.h) * dims_.w;
  }
  std::size_t sample_size() const {
    return static_cast<std::size_t>(dims_.c) * plane_size();
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double* plane(int b, int c) {
    return data_.data() + (static_cast<std::size_t>(b) * dims_.c + c) *
                              plane_size();
  }
  const double* plane(int b, int c) const {
    return data_.data() + (static_cast<std::size_t>(b) * dims_.c + c) *
                              plane_size();
  }
  double* sample(int b) { return data_.data() + b * sample_size(); }
  const double* sample(int b) const {
    return data_.data() + b * sample_size();
  }

  double& at(int b, int c, int y, int x) {
    return data_[((static_cast<std::size_t>(b) * dims_.c + c) * dims_.h + y) *
                     dims_.w +
                 x];
  }
  double at(int b, int c, int y, int x) const {
    return data_[((static_cast<std::size_t>(b) * dims_.c + c) * dims_.h + y) *
                     dims_.w +
                 x];
  }

  bool has_nonfinite() const;

 private:
  Tensor4(Dims4 d, std::vector<double> data)
      : dims_(d), data_(std::move(data)) {}

  Dims4 dims_;
  std::vector<double> data_;
};

/// Row-major n x n matrix of pairwise statistics.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(int n) : n_(n), v_(static_cast<std::size_t>(n) * n) {}

  int n() const { return n_; }
  double& at(int i, int j) { return v_[static_cast<std::size_t>(i) * n_ + j]; }
  double at(int i, int j) const {
    return v_[static_cast<std::size_t>(i) * n_ + j];
  }
  const std::vector<double>& values() const { return v_; }

 private:
  int n_ = 0;
  std::vector<double> v_;
};

struct CosineWarnings {
  int zero_norm_samples = 0;
};

/// Per-channel mean over all (b,h,w). Throws DimensionError on empty input.
ChannelVec channel_mean(const Tensor4& x);

/// Per-channel biased variance (divide by count) over all (b,h,w).
ChannelVec channel_var(const Tensor4& x);
ChannelVec channel_var(const Tensor4& x, const ChannelVec& mean);

/// (B,C,1,1) tensor of spatial means. Throws DimensionError if H*W == 0.
Tensor4 global_avg_pool(const Tensor4& x);

/// Per-channel 3x3 convolution with zero padding 1, plus per-channel bias.
/// kernels.size() must equal C.
Tensor4 depthwise_conv3(const Tensor4& x,
                        const std::vector<std::array<double, 9>>& kernels,
                        const ChannelVec& bias);

/// B x B cosine similarities between samples flattened to length C*H*W.
/// A zero-norm sample scores 0 against every other sample; the diagonal is
/// 1 by convention. Zero-norm occurrences are counted in `warnings` (when
/// given) and reported on the warning channel.
SquareMatrix pairwise_cosine_matrix(const Tensor4& x,
                                    CosineWarnings* warnings = nullptr);

}  // namespace normlab

#endif  // NORMLAB_TENSOR_HPP_
