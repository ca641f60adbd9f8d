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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "sctm/simd.hpp"

using namespace sctm::simd;

namespace {

const KernelTable* vector_table() {
  const KernelTable* t = avx2_kernels();
  if (t == nullptr || !__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return nullptr;
  return t;
}

std::vector<double> random_vec(std::mt19937_64& gen, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = U(gen);
  return v;
}

// Sizes around the vector width plus a large one; offset 1 breaks alignment.
const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 1001};

}  // namespace

TEST_CASE("scalar reference kernels") {
  const auto& s = scalar_kernels();
  CHECK(s.isa == Isa::kScalar);
  const double rho[] = {1.0, 2.0}, len[] = {0.5, 2.0}, qi[] = {1.0, 0.0}, qo[] = {0.0, 6.0}, qn[] = {0.0, 0.0};
  double out[2];
  CHECK(s.density_update(rho, len, qi, qo, qn, out, 2) == -1.0);
  CHECK(out[0] == 3.0);
  CHECK(out[1] == -1.0);
  const double x[] = {1.0, 2.0}, pts[] = {1.0, 2.0, 4.0, 6.0};
  double d[2];
  s.squared_distances(x, pts, 2, d, 2);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == 25.0);
  double v[] = {0.0, 1.0};
  s.scaled_exp(v, -2.0, 3.0, 2);
  CHECK(v[0] == 3.0);
  CHECK(v[1] == doctest::Approx(3 * std::exp(-2.0)));
  double m[] = {4.0, 4.0, 4.0};
  s.matern(m, 0.5, 1.0, 0, 1);
  s.matern(m + 1, 0.5, 1.0, 1, 1);
  s.matern(m + 2, 0.5, 1.0, 2, 1);
  CHECK(m[0] == doctest::Approx(std::exp(-1.0)));
  CHECK(m[1] == doctest::Approx(2 * std::exp(-1.0)));
  CHECK(m[2] == doctest::Approx((2 + 1.0 / 3) * std::exp(-1.0)));
  const double lo[] = {0.0, 1.0, -1.0}, hi[] = {2.0, 3.0, 0.5};
  CHECK(s.band_count(lo, hi, 0.5, 3) == 2);  // upper >= gamma > lower
  CHECK(s.band_count(lo, hi, 1.0, 3) == 1);
}

TEST_CASE("active table selection") {
  const auto& a = active_kernels();
  CHECK((a.isa == Isa::kScalar || a.isa == Isa::kAvx2));
  CHECK(isa_name(Isa::kScalar) == "scalar");
}

TEST_CASE("vector kernels match the scalar reference") {
  const KernelTable* v = vector_table();
  if (v == nullptr) {
    MESSAGE("AVX2/FMA not available; equivalence not exercised");
    return;
  }
  const auto& s = scalar_kernels();
  std::mt19937_64 gen(1);
  for (std::size_t n : kSizes) {
    for (std::size_t off : {0u, 1u}) {
      auto rho = random_vec(gen, n + off, 0, 30), len = random_vec(gen, n + off, 0.1, 2);
      auto qi = random_vec(gen, n + off, 0, 5), qo = random_vec(gen, n + off, 0, 9), qn = random_vec(gen, n + off, -3, 3);
      std::vector<double> a(n + off), b(n + off);
      const double wa = s.density_update(rho.data() + off, len.data() + off, qi.data() + off, qo.data() + off,
                                         qn.data() + off, a.data() + off, n);
      const double wb = v->density_update(rho.data() + off, len.data() + off, qi.data() + off, qo.data() + off,
                                          qn.data() + off, b.data() + off, n);
      CHECK(wa == wb);
      CHECK(a == b);  // same operation order: bit-identical

      for (std::size_t dim : {1u, 2u, 3u, 5u}) {
        const auto x = random_vec(gen, dim, 0, 1);
        const auto pts = random_vec(gen, n * dim + off, 0, 1);
        std::vector<double> da(n + off), db(n + off);
        s.squared_distances(x.data(), pts.data() + off, dim, da.data() + off, n);
        v->squared_distances(x.data(), pts.data() + off, dim, db.data() + off, n);
        for (std::size_t j = off; j < n + off; ++j) CHECK(db[j] == doctest::Approx(da[j]).epsilon(1e-14).scale(1e-300));
      }

      const auto base = random_vec(gen, n + off, 0, 9);
      auto ea = base, eb = base;
      s.scaled_exp(ea.data() + off, -1.7, 2.5, n);
      v->scaled_exp(eb.data() + off, -1.7, 2.5, n);
      for (std::size_t j = off; j < n + off; ++j) CHECK(eb[j] == doctest::Approx(ea[j]).epsilon(1e-13));

      for (int order = 0; order <= 2; ++order) {
        auto ma = base, mb = base;
        s.matern(ma.data() + off, 1.3, 0.8, order, n);
        v->matern(mb.data() + off, 1.3, 0.8, order, n);
        for (std::size_t j = off; j < n + off; ++j) CHECK(mb[j] == doctest::Approx(ma[j]).epsilon(1e-13));
      }

      const auto lo = random_vec(gen, n + off, -1, 1);
      auto hi = lo;
      const auto w = random_vec(gen, n + off, 0, 0.5);
      for (std::size_t j = 0; j < hi.size(); ++j) hi[j] += w[j];
      for (double g : {-0.5, 0.0, 0.3, lo.empty() ? 0.0 : lo[off % lo.size()]}) {
        CHECK(s.band_count(lo.data() + off, hi.data() + off, g, n) == v->band_count(lo.data() + off, hi.data() + off, g, n));
      }
    }
  }
}

TEST_CASE("vector exp handles extreme arguments like the reference") {
  const KernelTable* v = vector_table();
  if (v == nullptr) return;
  std::vector<double> x{0.0, -1e-300, -700.0, -745.0, -800.0, -1e6, 1e-3, 5.0};
  auto a = x, b = x;
  scalar_kernels().scaled_exp(a.data(), 1.0, 1.0, a.size());
  v->scaled_exp(b.data(), 1.0, 1.0, b.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (a[i] < 1e-300) CHECK(b[i] < 1e-300);
    else CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-13));
    CHECK(b[i] >= 0.0);
  }
}
