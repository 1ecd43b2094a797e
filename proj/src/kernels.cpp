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

#include "normlab/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

#include "normlab/errors.hpp"

namespace normlab::kernels {

namespace {

bool cpu_has_avx2_fma() {
#ifdef NORMLAB_HAVE_AVX2_BUILD
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect_isa() {
  if (const char* env = std::getenv("NORMLAB_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::kScalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (!cpu_has_avx2_fma())
        throw ConfigError("NORMLAB_KERNELS=avx2 but CPU lacks AVX2+FMA");
      return Isa::kAvx2;
    }
    if (std::strcmp(env, "auto") != 0)
      throw ConfigError(std::string("NORMLAB_KERNELS: unknown value '") + env +
                        "' (expected scalar|avx2|auto)");
  }
  return cpu_has_avx2_fma() ? Isa::kAvx2 : Isa::kScalar;
}

Isa& current_isa() {
  static Isa isa = detect_isa();
  return isa;
}

}  // namespace

Isa active_isa() { return current_isa(); }

void force_isa(Isa isa) {
  if (isa == Isa::kAvx2 && !cpu_has_avx2_fma())
    throw ConfigError("force_isa: CPU lacks AVX2+FMA");
  current_isa() = isa;
}

void reset_isa() { current_isa() = detect_isa(); }

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "?";
}

#ifdef NORMLAB_HAVE_AVX2_BUILD
#define NORMLAB_DISPATCH(fn, ...)                 \
  do {                                            \
    if (current_isa() == Isa::kAvx2)              \
      return avx2::fn(__VA_ARGS__);               \
    return scalar::fn(__VA_ARGS__);               \
  } while (0)
#else
#define NORMLAB_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

double sum(const double* x, std::size_t n) { NORMLAB_DISPATCH(sum, x, n); }

double dot(const double* x, const double* y, std::size_t n) {
  NORMLAB_DISPATCH(dot, x, y, n);
}

double sumsq_centered(const double* x, std::size_t n, double mu) {
  NORMLAB_DISPATCH(sumsq_centered, x, n, mu);
}

void normalize_affine(const double* x, std::size_t n, double mu,
                      double inv_std, double gamma, double beta, double* y) {
  NORMLAB_DISPATCH(normalize_affine, x, n, mu, inv_std, gamma, beta, y);
}

void scale_shift(const double* x, std::size_t n, double a, double b,
                 double* y) {
  NORMLAB_DISPATCH(scale_shift, x, n, a, b, y);
}

void add_scaled(const double* x, std::size_t n, double a, double* y) {
  NORMLAB_DISPATCH(add_scaled, x, n, a, y);
}

void relu(const double* x, std::size_t n, double* y) {
  NORMLAB_DISPATCH(relu, x, n, y);
}

void relu_backward(const double* x, const double* up, std::size_t n,
                   double* dx) {
  NORMLAB_DISPATCH(relu_backward, x, up, n, dx);
}

void sgd_update(double* p, const double* g, double* v, std::size_t n,
                double lr, double momentum, double wd) {
  NORMLAB_DISPATCH(sgd_update, p, g, v, n, lr, momentum, wd);
}

void conv3x3_acc(const double* in, int h, int w, const double* k9,
                 double* out) {
  NORMLAB_DISPATCH(conv3x3_acc, in, h, w, k9, out);
}

void conv3x3_kernel_grad_acc(const double* in, const double* up, int h, int w,
                             double* k9) {
  NORMLAB_DISPATCH(conv3x3_kernel_grad_acc, in, up, h, w, k9);
}

#undef NORMLAB_DISPATCH

}  // namespace normlab::kernels
