// Copyright 2026 The sctm Authors
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

#ifndef SCTM_SIMD_HPP
#define SCTM_SIMD_HPP

#include <cstddef>
#include <string_view>

namespace sctm::simd {

enum class Isa { kScalar, kAvx2 };

/// Kernel shapes shared by every instruction-set variant. All pointers are
/// unaligned-safe; `n` may be any size including zero.
struct KernelTable {
  Isa isa;

  /// out[i] = rho[i] + (q_in[i] - q_out[i] + q_net[i]) / len[i].
  /// Returns the most negative produced value (or 0 if none is negative).
  double (*density_update)(const double* rho, const double* len, const double* q_in, const double* q_out,
                           const double* q_net, double* out, std::size_t n);

  /// out[j] = sum_d (x[d] - points[j*dim + d])^2 for j < n.
  void (*squared_distances)(const double* x, const double* points, std::size_t dim, double* out, std::size_t n);

  /// In place: v[i] = exp(scale * v[i]) * amplitude.
  void (*scaled_exp)(double* v, double scale, double amplitude, std::size_t n);

  /// In place Matérn profile on squared distances: with s = scale * sqrt(v[i]),
  /// v[i] = amplitude * p(s) * exp(-s), p(s) = 1 (nu=1/2), 1+s (nu=3/2) or
  /// 1+s+s^2/3 (nu=5/2); `order` is 0, 1 or 2.
  void (*matern)(double* v, double scale, double amplitude, int order, std::size_t n);

  /// Counts i with upper[i] >= gamma > lower[i].
  std::size_t (*band_count)(const double* lower, const double* upper, double gamma, std::size_t n);
};

const KernelTable& scalar_kernels();

/// Returns nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_kernels();

/// Kernel table chosen once at first use: AVX2+FMA when the CPU reports both,
/// scalar otherwise. Setting SCTM_SIMD=scalar in the environment forces scalar.
const KernelTable& active_kernels();

std::string_view isa_name(Isa isa);

}  // namespace sctm::simd

#endif  // SCTM_SIMD_HPP
