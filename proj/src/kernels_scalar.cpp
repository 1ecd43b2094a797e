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

// Scalar reference kernels. These are the semantic ground truth the AVX2
// variants are tested against; keep them as plain loops.

#include "normlab/kernels.hpp"

namespace normlab::kernels::scalar {

double sum(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sumsq_centered(const double* x, std::size_t n, double mu) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = x[i] - mu;
    s += d * d;
  }
  return s;
}

void normalize_affine(const double* x, std::size_t n, double mu,
                      double inv_std, double gamma, double beta, double* y) {
  const double a = inv_std * gamma;
  for (std::size_t i = 0; i < n; ++i) y[i] = (x[i] - mu) * a + beta;
}

void scale_shift(const double* x, std::size_t n, double a, double b,
                 double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b;
}

void add_scaled(const double* x, std::size_t n, double a, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void relu(const double* x, std::size_t n, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* x, const double* up, std::size_t n,
                   double* dx) {
  for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? up[i] : 0.0;
}

void sgd_update(double* p, const double* g, double* v, std::size_t n,
                double lr, double momentum, double wd) {
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = momentum * v[i] + (g[i] + wd * p[i]);
    p[i] -= lr * v[i];
  }
}

void conv3x3_acc(const double* in, int h, int w, const double* k9,
                 double* out) {
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = 0; dy < 3; ++dy) {
        int sy = y + dy - 1;
        if (sy < 0 || sy >= h) continue;
        for (int dx = 0; dx < 3; ++dx) {
          int sx = x + dx - 1;
          if (sx < 0 || sx >= w) continue;
          acc += k9[dy * 3 + dx] * in[sy * w + sx];
        }
      }
      out[y * w + x] += acc;
    }
  }
}

void conv3x3_kernel_grad_acc(const double* in, const double* up, int h, int w,
                             double* k9) {
  for (int dy = 0; dy < 3; ++dy) {
    for (int dx = 0; dx < 3; ++dx) {
      double acc = 0.0;
      for (int y = 0; y < h; ++y) {
        int sy = y + dy - 1;
        if (sy < 0 || sy >= h) continue;
        for (int x = 0; x < w; ++x) {
          int sx = x + dx - 1;
          if (sx < 0 || sx >= w) continue;
          acc += up[y * w + x] * in[sy * w + sx];
        }
      }
      k9[dy * 3 + dx] += acc;
    }
  }
}

}  // namespace normlab::kernels::scalar
