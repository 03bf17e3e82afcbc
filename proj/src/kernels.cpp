// Copyright 2026 The lkg Authors
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

#include "lkg/kernels.hpp"

#include <cmath>
#include <cstdlib>

#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace lkg::kernels {

#if defined(LKG_HAVE_AVX2)
const Ops* avx2_ops();  // kernels_avx2.cpp
#endif

namespace {

// ---------------------------------------------------------------------------
// Scalar reference kernels.
// ---------------------------------------------------------------------------

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double* x, double alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double sum_sq_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

void adagrad_scalar(double* p, double* acc, const double* g, std::size_t n,
                    double lr, double eps) {
  for (std::size_t i = 0; i < n; ++i) {
    acc[i] += g[i] * g[i];
    p[i] -= lr * g[i] / (std::sqrt(acc[i]) + eps);
  }
}

constexpr Ops kScalar = {"scalar",      dot_scalar,    axpy_scalar,
                         scale_scalar,  sum_sq_scalar, adagrad_scalar};

// ---------------------------------------------------------------------------
// NEON kernels (aarch64: two lanes of f64 per vector).
// ---------------------------------------------------------------------------

#if defined(__aarch64__)

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_neon(double* x, double alpha, std::size_t n) {
  float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), va));
  for (; i < n; ++i) x[i] *= alpha;
}

double sum_sq_neon(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(x + i);
    acc = vfmaq_f64(acc, v, v);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

void adagrad_neon(double* p, double* acc, const double* g, std::size_t n,
                  double lr, double eps) {
  float64x2_t vlr = vdupq_n_f64(lr);
  float64x2_t veps = vdupq_n_f64(eps);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vg = vld1q_f64(g + i);
    float64x2_t va = vfmaq_f64(vld1q_f64(acc + i), vg, vg);
    vst1q_f64(acc + i, va);
    float64x2_t denom = vaddq_f64(vsqrtq_f64(va), veps);
    float64x2_t step = vdivq_f64(vmulq_f64(vlr, vg), denom);
    vst1q_f64(p + i, vsubq_f64(vld1q_f64(p + i), step));
  }
  for (; i < n; ++i) {
    acc[i] += g[i] * g[i];
    p[i] -= lr * g[i] / (std::sqrt(acc[i]) + eps);
  }
}

constexpr Ops kNeon = {"neon",     dot_neon,    axpy_neon,
                       scale_neon, sum_sq_neon, adagrad_neon};

#endif  // __aarch64__

bool avx2_supported() {
#if defined(LKG_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops* backend_by_name(std::string_view name) {
  if (name == "scalar") return &kScalar;
#if defined(__aarch64__)
  if (name == "neon") return &kNeon;
#endif
#if defined(LKG_HAVE_AVX2)
  if (name == "avx2" && avx2_supported()) return avx2_ops();
#endif
  return nullptr;
}

const Ops* best_backend() {
#if defined(LKG_HAVE_AVX2)
  if (avx2_supported()) return avx2_ops();
#endif
#if defined(__aarch64__)
  return &kNeon;
#else
  return &kScalar;
#endif
}

const Ops* resolve_initial() {
  if (const char* env = std::getenv("LKG_KERNELS")) {
    if (const Ops* ops = backend_by_name(env)) return ops;
  }
  return best_backend();
}

const Ops*& selected() {
  static const Ops* ops = resolve_initial();
  return ops;
}

}  // namespace

const Ops& active() { return *selected(); }

const Ops& scalar_ops() { return kScalar; }

bool set_backend(std::string_view name) {
  const Ops* ops = backend_by_name(name);
  if (!ops) return false;
  selected() = ops;
  return true;
}

std::vector<std::string> available_backends() {
  std::vector<std::string> out = {"scalar"};
#if defined(__aarch64__)
  out.push_back("neon");
#endif
  if (avx2_supported()) out.push_back("avx2");
  return out;
}

}  // namespace lkg::kernels
