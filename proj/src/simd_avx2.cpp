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

// AVX2 variants of the kernel table. This translation unit is the only one
// compiled with -mavx2 -mfma; nothing here may run before dispatch has
// confirmed CPU support.

#include "sctm/simd.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace sctm::simd {
namespace {

// exp(x) for x in [-708.39, 709.78]; lanes below the lower limit return 0.
// Cody-Waite reduction x = n ln2 + r followed by the rational approximation
// exp(r) = 1 + 2r P(r^2) / (Q(r^2) - r P(r^2)).
inline __m256d exp_pd(__m256d x) {
  const __m256d lo_limit = _mm256_set1_pd(-708.3964185322641);
  const __m256d hi_limit = _mm256_set1_pd(709.782712893384);
  const __m256d underflow = _mm256_cmp_pd(x, lo_limit, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo_limit), hi_limit);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125e-1), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212e-6), r);

  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.00000000000000000009e0));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  // Scale by 2^n. n lies in [-1022, 1024]; split the shift in two halves so
  // that n = 1024 (top of the range) does not produce an infinite factor.
  const __m128i ni = _mm256_cvtpd_epi32(n);
  const __m128i half = _mm_srai_epi32(ni, 1);
  const __m128i rest = _mm_sub_epi32(ni, half);
  const __m256i bias = _mm256_set1_epi64x(1023);
  const __m256d f1 = _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(half), bias), 52));
  const __m256d f2 = _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(rest), bias), 52));
  e = _mm256_mul_pd(_mm256_mul_pd(e, f1), f2);
  return _mm256_andnot_pd(underflow, e);
}

double density_update(const double* rho, const double* len, const double* q_in, const double* q_out,
                      const double* q_net, double* out, std::size_t n) {
  __m256d most_negative = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d flow =
        _mm256_add_pd(_mm256_sub_pd(_mm256_loadu_pd(q_in + i), _mm256_loadu_pd(q_out + i)), _mm256_loadu_pd(q_net + i));
    const __m256d v = _mm256_add_pd(_mm256_loadu_pd(rho + i), _mm256_div_pd(flow, _mm256_loadu_pd(len + i)));
    _mm256_storeu_pd(out + i, v);
    most_negative = _mm256_min_pd(most_negative, v);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, most_negative);
  double result = std::fmin(std::fmin(lanes[0], lanes[1]), std::fmin(lanes[2], lanes[3]));
  for (; i < n; ++i) {
    const double v = rho[i] + ((q_in[i] - q_out[i]) + q_net[i]) / len[i];
    out[i] = v;
    if (v < result) result = v;
  }
  return result;
}

void squared_distances(const double* x, const double* points, std::size_t dim, double* out, std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const double* p = points + j * dim;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t d = 0; d < dim; ++d) {
      const __m256d col = _mm256_set_pd(p[3 * dim + d], p[2 * dim + d], p[dim + d], p[d]);
      const __m256d diff = _mm256_sub_pd(_mm256_set1_pd(x[d]), col);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
    }
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < n; ++j) {
    const double* p = points + j * dim;
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = x[d] - p[d];
      acc = acc + diff * diff;
    }
    out[j] = acc;
  }
}

void scaled_exp(double* v, double scale, double amplitude, std::size_t n) {
  const __m256d s = _mm256_set1_pd(scale);
  const __m256d a = _mm256_set1_pd(amplitude);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(v + i, _mm256_mul_pd(exp_pd(_mm256_mul_pd(s, _mm256_loadu_pd(v + i))), a));
  }
  for (; i < n; ++i) v[i] = std::exp(scale * v[i]) * amplitude;
}

void matern(double* v, double scale, double amplitude, int order, std::size_t n) {
  const __m256d sc = _mm256_set1_pd(scale);
  const __m256d amp = _mm256_set1_pd(amplitude);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d third = _mm256_set1_pd(3.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d s = _mm256_mul_pd(sc, _mm256_sqrt_pd(_mm256_loadu_pd(v + i)));
    __m256d p = one;
    if (order == 1) {
      p = _mm256_add_pd(one, s);
    } else if (order == 2) {
      p = _mm256_add_pd(_mm256_add_pd(one, s), _mm256_div_pd(_mm256_mul_pd(s, s), third));
    }
    const __m256d e = exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), s));
    _mm256_storeu_pd(v + i, _mm256_mul_pd(_mm256_mul_pd(amp, p), e));
  }
  for (; i < n; ++i) {
    const double s = scale * std::sqrt(v[i]);
    double p = 1.0;
    if (order == 1) {
      p = 1.0 + s;
    } else if (order == 2) {
      p = 1.0 + s + (s * s) / 3.0;
    }
    v[i] = amplitude * p * std::exp(-s);
  }
}

std::size_t band_count(const double* lower, const double* upper, double gamma, std::size_t n) {
  const __m256d g = _mm256_set1_pd(gamma);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d hit = _mm256_and_pd(_mm256_cmp_pd(_mm256_loadu_pd(upper + i), g, _CMP_GE_OQ),
                                      _mm256_cmp_pd(g, _mm256_loadu_pd(lower + i), _CMP_GT_OQ));
    count += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(hit))));
  }
  for (; i < n; ++i) {
    if (upper[i] >= gamma && gamma > lower[i]) ++count;
  }
  return count;
}

constexpr KernelTable kAvx2{Isa::kAvx2, &density_update, &squared_distances, &scaled_exp, &matern, &band_count};

}  // namespace

const KernelTable* avx2_kernels() { return &kAvx2; }

}  // namespace sctm::simd

#else

namespace sctm::simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace sctm::simd

#endif
