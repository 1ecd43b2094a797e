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

// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; nothing here may run unless the dispatcher confirmed the CPU
// supports both feature sets.

#include "normlab/kernels.hpp"

#ifdef NORMLAB_HAVE_AVX2_BUILD

#include <immintrin.h>

namespace normlab::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// Dot product over a contiguous range, shared by dot() and the conv kernels.
inline double dot_range(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                           acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4),
                           _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                           acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

}  // namespace

double sum(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
    acc2 = _mm256_add_pd(acc2, _mm256_loadu_pd(x + i + 8));
    acc3 = _mm256_add_pd(acc3, _mm256_loadu_pd(x + i + 12));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
  }
  double s =
      hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) s += x[i];
  return s;
}

double dot(const double* x, const double* y, std::size_t n) {
  return dot_range(x, y, n);
}

double sumsq_centered(const double* x, std::size_t n, double mu) {
  const __m256d vmu = _mm256_set1_pd(mu);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x + i), vmu);
    __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(x + i + 4), vmu);
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x + i), vmu);
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    double d = x[i] - mu;
    s += d * d;
  }
  return s;
}

void normalize_affine(const double* x, std::size_t n, double mu,
                      double inv_std, double gamma, double beta, double* y) {
  const double a = inv_std * gamma;
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vmu = _mm256_set1_pd(mu);
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), vmu);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(d, va, vb));
  }
  for (; i < n; ++i) y[i] = (x[i] - mu) * a + beta;
}

void scale_shift(const double* x, std::size_t n, double a, double b,
                 double* y) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vb));
  }
  for (; i < n; ++i) y[i] = a * x[i] + b;
}

void add_scaled(const double* x, std::size_t n, double a, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r =
        _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void relu(const double* x, std::size_t n, double* y) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* x, const double* up, std::size_t n,
                   double* dx) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(dx + i, _mm256_and_pd(_mm256_loadu_pd(up + i), mask));
  }
  for (; i < n; ++i) dx[i] = x[i] > 0.0 ? up[i] : 0.0;
}

void sgd_update(double* p, const double* g, double* v, std::size_t n,
                double lr, double momentum, double wd) {
  const __m256d vm = _mm256_set1_pd(momentum);
  const __m256d vwd = _mm256_set1_pd(wd);
  const __m256d vlr = _mm256_set1_pd(lr);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d pv = _mm256_loadu_pd(p + i);
    __m256d gv = _mm256_fmadd_pd(vwd, pv, _mm256_loadu_pd(g + i));
    __m256d vv = _mm256_fmadd_pd(vm, _mm256_loadu_pd(v + i), gv);
    _mm256_storeu_pd(v + i, vv);
    _mm256_storeu_pd(p + i, _mm256_fnmadd_pd(vlr, vv, pv));
  }
  for (; i < n; ++i) {
    v[i] = momentum * v[i] + (g[i] + wd * p[i]);
    p[i] -= lr * v[i];
  }
}

void conv3x3_acc(const double* in, int h, int w, const double* k9,
                 double* out) {
  for (int y = 0; y < h; ++y) {
    const int sy_lo = y > 0 ? -1 : 0;
    const int sy_hi = y < h - 1 ? 1 : 0;
    double* orow = out + static_cast<std::size_t>(y) * w;

    // Border columns plus anything too narrow for a vector: scalar.
    auto scalar_at = [&](int x) {
      double acc = 0.0;
      for (int dy = sy_lo; dy <= sy_hi; ++dy) {
        const double* irow = in + static_cast<std::size_t>(y + dy) * w;
        const double* krow = k9 + (dy + 1) * 3;
        for (int dx = -1; dx <= 1; ++dx) {
          int sx = x + dx;
          if (sx < 0 || sx >= w) continue;
          acc += krow[dx + 1] * irow[sx];
        }
      }
      orow[x] += acc;
    };

    scalar_at(0);
    int x = 1;
    for (; x + 4 <= w - 1; x += 4) {  // all taps in-bounds for x..x+3
      __m256d acc = _mm256_loadu_pd(orow + x);
      for (int dy = sy_lo; dy <= sy_hi; ++dy) {
        const double* irow = in + static_cast<std::size_t>(y + dy) * w + x;
        const double* krow = k9 + (dy + 1) * 3;
        acc = _mm256_fmadd_pd(_mm256_set1_pd(krow[0]),
                              _mm256_loadu_pd(irow - 1), acc);
        acc = _mm256_fmadd_pd(_mm256_set1_pd(krow[1]), _mm256_loadu_pd(irow),
                              acc);
        acc = _mm256_fmadd_pd(_mm256_set1_pd(krow[2]),
                              _mm256_loadu_pd(irow + 1), acc);
      }
      _mm256_storeu_pd(orow + x, acc);
    }
    for (; x < w; ++x) scalar_at(x);
  }
}

void conv3x3_kernel_grad_acc(const double* in, const double* up, int h, int w,
                             double* k9) {
  for (int dy = 0; dy < 3; ++dy) {
    const int y_lo = dy == 0 ? 1 : 0;
    const int y_hi = dy == 2 ? h - 2 : h - 1;
    for (int dx = 0; dx < 3; ++dx) {
      const int x_lo = dx == 0 ? 1 : 0;
      const int x_hi = dx == 2 ? w - 2 : w - 1;
      const int len = x_hi - x_lo + 1;
      if (len <= 0 || y_hi < y_lo) continue;
      double acc = 0.0;
      for (int y = y_lo; y <= y_hi; ++y) {
        const double* urow = up + static_cast<std::size_t>(y) * w + x_lo;
        const double* irow =
            in + static_cast<std::size_t>(y + dy - 1) * w + x_lo + dx - 1;
        acc += dot_range(urow, irow, static_cast<std::size_t>(len));
      }
      k9[dy * 3 + dx] += acc;
    }
  }
}

}  // namespace normlab::kernels::avx2

#endif  // NORMLAB_HAVE_AVX2_BUILD
