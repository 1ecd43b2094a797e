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

#ifndef NORMLAB_KERNELS_HPP_
#define NORMLAB_KERNELS_HPP_

#include <cstddef>

// Double-precision inner loops shared by the tensor ops, the normalization
// layers, and the training harness. Every kernel has a scalar reference
// implementation and, where the platform supports it, an AVX2+FMA variant.
// The implementation is selected once at startup: auto-detection via CPU
// features, overridable with the NORMLAB_KERNELS environment variable
// ("scalar", "avx2", "auto") or force_isa() from test code.
//
// Scalar and AVX2 variants of a reduction may reassociate the accumulation,
// so their results agree only to rounding error; the equivalence suite pins
// the tolerance. Within one process the selected variant never changes, so
// repeated runs are bit-reproducible.

namespace normlab::kernels {

enum class Isa { kScalar, kAvx2 };

/// Implementation currently in effect.
Isa active_isa();

/// Pin the implementation (test / reproducibility hook). Throws ConfigError
/// if the requested ISA is not supported on this CPU.
void force_isa(Isa isa);

/// Return to environment/auto selection.
void reset_isa();

const char* isa_name(Isa isa);

// ---- reductions over contiguous spans ----

double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);

/// Sum of squared deviations from a given center: sum((x[i] - mu)^2).
double sumsq_centered(const double* x, std::size_t n, double mu);

// ---- elementwise maps ----

/// y[i] = (x[i] - mu) * inv_std * gamma + beta
void normalize_affine(const double* x, std::size_t n, double mu,
                      double inv_std, double gamma, double beta, double* y);

/// y[i] = a * x[i] + b
void scale_shift(const double* x, std::size_t n, double a, double b,
                 double* y);

/// y[i] += a * x[i]
void add_scaled(const double* x, std::size_t n, double a, double* y);

/// y[i] = max(x[i], 0)
void relu(const double* x, std::size_t n, double* y);

/// dx[i] = x[i] > 0 ? up[i] : 0
void relu_backward(const double* x, const double* up, std::size_t n,
                   double* dx);

/// SGD with momentum and L2 weight decay:
///   v[i] = momentum * v[i] + (g[i] + wd * p[i]);  p[i] -= lr * v[i]
void sgd_update(double* p, const double* g, double* v, std::size_t n,
                double lr, double momentum, double wd);

// ---- 3x3 stencils on one H x W plane (zero padding 1, same-size output) ----

/// out[y][x] += sum_{dy,dx} k9[dy*3+dx] * in[y+dy-1][x+dx-1]
void conv3x3_acc(const double* in, int h, int w, const double* k9,
                 double* out);

/// k9[dy*3+dx] += sum_{y,x} up[y][x] * in[y+dy-1][x+dx-1]
void conv3x3_kernel_grad_acc(const double* in, const double* up, int h, int w,
                             double* k9);

// Scalar reference entry points, used directly by the equivalence tests.
namespace scalar {
double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sumsq_centered(const double* x, std::size_t n, double mu);
void normalize_affine(const double* x, std::size_t n, double mu,
                      double inv_std, double gamma, double beta, double* y);
void scale_shift(const double* x, std::size_t n, double a, double b,
                 double* y);
void add_scaled(const double* x, std::size_t n, double a, double* y);
void relu(const double* x, std::size_t n, double* y);
void relu_backward(const double* x, const double* up, std::size_t n,
                   double* dx);
void sgd_update(double* p, const double* g, double* v, std::size_t n,
                double lr, double momentum, double wd);
void conv3x3_acc(const double* in, int h, int w, const double* k9,
                 double* out);
void conv3x3_kernel_grad_acc(const double* in, const double* up, int h, int w,
                             double* k9);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define NORMLAB_HAVE_AVX2_BUILD 1
namespace avx2 {
double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sumsq_centered(const double* x, std::size_t n, double mu);
void normalize_affine(const double* x, std::size_t n, double mu,
                      double inv_std, double gamma, double beta, double* y);
void scale_shift(const double* x, std::size_t n, double a, double b,
                 double* y);
void add_scaled(const double* x, std::size_t n, double a, double* y);
void relu(const double* x, std::size_t n, double* y);
void relu_backward(const double* x, const double* up, std::size_t n,
                   double* dx);
void sgd_update(double* p, const double* g, double* v, std::size_t n,
                double lr, double momentum, double wd);
void conv3x3_acc(const double* in, int h, int w, const double* k9,
                 double* out);
void conv3x3_kernel_grad_acc(const double* in, const double* up, int h, int w,
                             double* k9);
}  // namespace avx2
#endif

}  // namespace normlab::kernels

#endif  // NORMLAB_KERNELS_HPP_
