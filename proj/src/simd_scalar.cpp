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

#include <cmath>
#include <cstdlib>
#include <string>

#include "sctm/simd.hpp"

namespace sctm::simd {
namespace {

double density_update(const double* rho, const double* len, const double* q_in, const double* q_out,
                      const double* q_net, double* out, std::size_t n) {
  double most_negative = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = rho[i] + ((q_in[i] - q_out[i]) + q_net[i]) / len[i];
    out[i] = v;
    if (v < most_negative) most_negative = v;
  }
  return most_negative;
}

void squared_distances(const double* x, const double* points, std::size_t dim, double* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
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
  for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(scale * v[i]) * amplitude;
}

void matern(double* v, double scale, double amplitude, int order, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
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
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (upper[i] >= gamma && gamma > lower[i]) ++count;
  }
  return count;
}

constexpr KernelTable kScalar{Isa::kScalar, &density_update, &squared_distances, &scaled_exp, &matern, &band_count};

const KernelTable& select() {
  const char* forced = std::getenv("SCTM_SIMD");
  if (forced != nullptr && std::string(forced) == "scalar") return kScalar;
#if defined(__x86_64__) || defined(_M_X64)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    if (const KernelTable* t = avx2_kernels()) return *t;
  }
#endif
  return kScalar;
}

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

const KernelTable& active_kernels() {
  static const KernelTable& table = select();
  return table;
}

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

}  // namespace sctm::simd
