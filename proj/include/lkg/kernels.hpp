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

#ifndef LKG_KERNELS_HPP
#define LKG_KERNELS_HPP

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lkg::kernels {

/// Dense double-precision primitives behind the embedding math.
///
/// Every entry has a scalar reference implementation plus optional SIMD
/// variants (AVX2+FMA on x86-64, NEON on aarch64) selected once at runtime
/// from CPU capabilities. SIMD variants may reassociate sums, so results can
/// differ from scalar in the last ulps; a fixed backend is bit-reproducible
/// run to run on the same machine.
struct Ops {
  const char* name;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // x[i] *= alpha
  void (*scale)(double* x, double alpha, std::size_t n);
  // sum_i x[i]^2
  double (*sum_sq)(const double* x, std::size_t n);
  // acc[i] += g[i]^2; p[i] -= lr * g[i] / (sqrt(acc[i]) + eps)
  void (*adagrad)(double* p, double* acc, const double* g, std::size_t n,
                  double lr, double eps);
};

/// The currently selected backend. First call resolves it: the LKG_KERNELS
/// environment variable ("scalar", "avx2", "neon") wins if set and supported,
/// otherwise the best supported variant.
const Ops& active();

/// Force a backend by name. Returns false (and leaves the selection alone)
/// if the name is unknown or unsupported on this CPU.
bool set_backend(std::string_view name);

/// Backends usable on this CPU, scalar first.
std::vector<std::string> available_backends();

/// Scalar reference table, always available (used as the equivalence oracle).
const Ops& scalar_ops();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void scale(std::span<double> x, double alpha) {
  active().scale(x.data(), alpha, x.size());
}
inline double sum_sq(std::span<const double> x) {
  return active().sum_sq(x.data(), x.size());
}
inline void adagrad(std::span<double> p, std::span<double> acc,
                    std::span<const double> g, double lr, double eps) {
  active().adagrad(p.data(), acc.data(), g.data(), p.size(), lr, eps);
}

}  // namespace lkg::kernels

#endif  // LKG_KERNELS_HPP
