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

#include <Eigen/Dense>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gpr_oracle.hpp"
#include "sctm/gpr.hpp"

using namespace sctm;
using sctm::testing::Naive;

namespace {

// General-nu Matern covariance through the modified Bessel function.
double matern_bessel(double nu, double sigma, double l, double r) {
  if (r == 0.0) return sigma * sigma;
  const double z = std::sqrt(2 * nu) * r / l;
  return sigma * sigma * std::pow(2.0, 1 - nu) / boost::math::tgamma(nu) * std::pow(z, nu) *
         boost::math::cyl_bessel_k(nu, z);
}

GprDataset noisy_sine_data(std::mt19937_64& gen, std::size_t n, std::size_t dim, double noise) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  GprDataset d(dim);
  std::vector<double> k(dim);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (auto& x : k) s += x = U(gen);
    d.add(k, std::sin(4 * s) + 0.1 * U(gen), noise * U(gen));
  }
  return d;
}

}  // namespace

TEST_CASE("kernel values") {
  for (auto kind : {KernelKind::kSquaredExponential, KernelKind::kMatern12, KernelKind::kMatern32,
                    KernelKind::kMatern52}) {
    const Kernel k{kind, 1.7, 0.4, {}};
    const std::vector<double> a{0.3, -0.2};
    CHECK(k(a, a) == doctest::Approx(1.7 * 1.7));
  }
  const Kernel se{KernelKind::kSquaredExponential, 2.0, 0.5, {}};
  CHECK(se.of_distance(0.5) == doctest::Approx(4 * std::exp(-0.5)).epsilon(1e-15));
  const Kernel m32{KernelKind::kMatern32, 1.0, 1.0, {}};
  CHECK(m32.of_distance(1.0) == doctest::Approx((1 + std::sqrt(3.0)) * std::exp(-std::sqrt(3.0))));
  CHECK(m32.of_distance(1.0) == doctest::Approx(0.48335).epsilon(1e-5));
  CHECK(parse_kernel_kind("matern52") == KernelKind::kMatern52);
  CHECK(!parse_kernel_kind("rbf2"));
  const std::vector<double> a{0.0}, b{1.0, 2.0};
  CHECK_THROWS(se(a, b));
}

TEST_CASE("Matern closed forms match the Bessel definition") {
  const std::pair<KernelKind, double> cases[] = {
      {KernelKind::kMatern12, 0.5}, {KernelKind::kMatern32, 1.5}, {KernelKind::kMatern52, 2.5}};
  for (const auto& [kind, nu] : cases) {
    const Kernel k{kind, 1.3, 0.7, {}};
    for (double r : {1e-3, 0.05, 0.3, 0.7, 1.0, 2.5, 6.0}) {
      CHECK(k.of_distance(r) == doctest::Approx(matern_bessel(nu, 1.3, 0.7, r)).epsilon(1e-10));
    }
  }
}

TEST_CASE("input rescaling divides each coordinate") {
  const Kernel k{KernelKind::kSquaredExponential, 1.0, 1.0, {2.0, 10.0}};
  const std::vector<double> a{0, 0}, b{2, 10};
  CHECK(k(a, b) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("Gram matrices are positive semi-definite") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (auto kind : {KernelKind::kSquaredExponential, KernelKind::kMatern32, KernelKind::kMatern52}) {
    const Kernel k{kind, 1.5, 0.3, {}};
    Eigen::MatrixXd pts(60, 3);
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = U(gen);
    Eigen::MatrixXd G(60, 60);
    for (int i = 0; i < 60; ++i)
      for (int j = 0; j < 60; ++j) {
        const Eigen::RowVector3d a = pts.row(i), b = pts.row(j);
        G(i, j) = k(std::span<const double>(a.data(), 3), std::span<const double>(b.data(), 3));
      }
    CHECK((G - G.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8 * 1.5 * 1.5);
  }
}

TEST_CASE("posterior matches the direct formulas") {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(rep % 9), dim = 1 + static_cast<std::size_t>(rep % 3);
    const auto data = noisy_sine_data(gen, n, dim, 0.05);
    const Kernel kern{static_cast<KernelKind>(rep % 4), 0.5 + U(gen), 0.2 + U(gen), {}};
    const GprPosterior post(data, kern);
    const Naive naive(data, kern);
    CHECK(post.log_marginal_likelihood() == doctest::Approx(naive.loglik).epsilon(1e-8));
    CHECK(log_marginal_likelihood(data, kern) == doctest::Approx(naive.loglik).epsilon(1e-8));
    std::vector<double> q(dim);
    for (int j = 0; j < 10; ++j) {
      for (auto& x : q) x = 1.4 * U(gen) - 0.2;
      const auto a = post.predict(q), b = naive.predict(data, kern, q);
      CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-8).scale(1.0));
      CHECK(a.sd == doctest::Approx(b.sd).epsilon(1e-8).scale(1.0));
      CHECK(a.sd <= kern.sigma_c * post.standardization().scale + 1e-10);
    }
    // Batch and mean-only paths agree with the single-query path.
    std::vector<double> qs(5 * dim), m(5), s(5), m2(5);
    for (auto& x : qs) x = U(gen);
    post.predict(qs.data(), 5, m.data(), s.data());
    post.predict_mean(qs.data(), 5, m2.data());
    for (std::size_t j = 0; j < 5; ++j) {
      const auto p = post.predict(std::span<const double>(qs.data() + j * dim, dim));
      CHECK(m[j] == doctest::Approx(p.mean).epsilon(1e-12).scale(1.0));
      CHECK(m2[j] == doctest::Approx(p.mean).epsilon(1e-12).scale(1.0));
      CHECK(s[j] == doctest::Approx(p.sd).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("posterior limiting cases") {
  const Kernel kern{KernelKind::kMatern52, 1.0, 0.1, {}};
  GprDataset d(1);
  d.add(std::vector<double>{0.0}, 3.0, 0.0);
  d.add(std::vector<double>{5.0}, 1.0, 0.0);
  const GprPosterior exact(d, kern);
  CHECK(exact.mean(std::vector<double>{0.0}) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(exact.stddev(std::vector<double>{0.0}) == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  // Far away: prior mean and sd sigma_c * scale.
  const auto far = exact.predict(std::vector<double>{100.0});
  CHECK(far.mean == doctest::Approx(exact.standardization().mean).epsilon(1e-6));
  CHECK(far.sd == doctest::Approx(exact.standardization().scale).epsilon(1e-6));

  // Noise equal to the signal variance halves the standardized observation.
  const double scale = Standardization::of(d.values()).scale;
  GprDataset noisy(1);
  noisy.add(std::vector<double>{0.0}, 3.0, scale * scale);
  noisy.add(std::vector<double>{5.0}, 1.0, 0.0);
  const GprPosterior half(noisy, kern);
  const auto& st = half.standardization();
  CHECK(st.forward(half.mean(std::vector<double>{0.0})) == doctest::Approx(st.forward(3.0) / 2).epsilon(1e-10));
}

TEST_CASE("standardization") {
  const std::vector<double> v{1, 4, 9, 16, 25};
  const auto st = Standardization::of(v);
  double m = 0, s2 = 0;
  for (double x : v) m += st.forward(x) / 5;
  for (double x : v) s2 += st.forward(x) * st.forward(x) / 4;
  CHECK(m == doctest::Approx(0.0).scale(1.0));
  CHECK(s2 == doctest::Approx(1.0));
  for (double x : v) CHECK(st.backward(st.forward(x)) == doctest::Approx(x).epsilon(1e-12));
  const std::vector<double> flat{2, 2, 2};
  CHECK(Standardization::of(flat).scale == 1.0);
}

TEST_CASE("log likelihood values") {
  GprDataset one(1);
  one.add(std::vector<double>{0.5}, 0.0, 0.0);
  CHECK(log_marginal_likelihood(one, Kernel{KernelKind::kSquaredExponential, 1.0, 1.0, {}}) ==
        doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)));
  CHECK(log_marginal_likelihood(one, Kernel{KernelKind::kSquaredExponential, 1.0, 1.0, {}}) ==
        doctest::Approx(-0.91894).epsilon(1e-5));

  // Smooth data with one outlier: inflating the outlier's noise helps, and the
  // finite difference matches d l / d tau_j^2 = (alpha_j^2 - [K^-1]_jj) / (2 scale^2).
  const Kernel kern{KernelKind::kSquaredExponential, 1.0, 0.3, {}};
  auto build = [&](double tau_out) {
    GprDataset d(1);
    for (int i = 0; i < 15; ++i) {
      const double x = i / 14.0;
      d.add(std::vector<double>{x}, i == 7 ? 5.0 : std::sin(3 * x), i == 7 ? tau_out : 1e-3);
    }
    return d;
  };
  const double t0 = 0.05;
  const auto base = build(t0);
  CHECK(log_marginal_likelihood(build(2 * t0), kern) > log_marginal_likelihood(base, kern));
  const Naive nv(base, kern);
  const Eigen::VectorXd alpha = nv.inv * nv.nu;
  const double analytic = 0.5 * (alpha(7) * alpha(7) - nv.inv(7, 7)) / (nv.st.scale * nv.st.scale);
  const double h = 1e-6;
  const double fd = (log_marginal_likelihood(build(t0 + h), kern) - log_marginal_likelihood(build(t0 - h), kern)) / (2 * h);
  CHECK(fd == doctest::Approx(analytic).epsilon(1e-5));
}

TEST_CASE("equal noise reproduces homoscedastic regression") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  GprDataset d(2);
  const double tau2 = 0.02;
  for (int i = 0; i < 25; ++i) {
    const std::vector<double> k{U(gen), U(gen)};
    d.add(k, std::cos(3 * k[0]) * k[1], tau2);
  }
  const Kernel kern{KernelKind::kMatern32, 1.2, 0.4, {}};
  const GprPosterior post(d, kern);
  // Reference through the eigen-decomposition of the noise-free Gram matrix.
  const auto st = Standardization::of(d.values());
  Eigen::MatrixXd G(25, 25);
  Eigen::VectorXd y(25);
  for (int i = 0; i < 25; ++i) {
    y(i) = st.forward(d.values()[static_cast<std::size_t>(i)]);
    for (int j = 0; j < 25; ++j) G(i, j) = kern(d.point(static_cast<std::size_t>(i)), d.point(static_cast<std::size_t>(j)));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  const Eigen::VectorXd shifted = es.eigenvalues().array() + tau2 / (st.scale * st.scale);
  const Eigen::MatrixXd& V = es.eigenvectors();
  const Eigen::VectorXd w = V * (V.transpose() * y).cwiseQuotient(shifted);
  for (int j = 0; j < 20; ++j) {
    const std::vector<double> q{U(gen), U(gen)};
    Eigen::VectorXd c(25);
    for (int i = 0; i < 25; ++i) c(i) = kern(q, d.point(static_cast<std::size_t>(i)));
    const Eigen::VectorXd vc = V.transpose() * c;
    const double var = kern(q, q) - vc.cwiseQuotient(shifted).dot(vc);
    const auto p = post.predict(q);
    CHECK(p.mean == doctest::Approx(st.backward(c.dot(w))).epsilon(1e-8));
    CHECK(p.sd == doctest::Approx(st.scale * std::sqrt(var)).epsilon(1e-6));
  }
}

TEST_CASE("more data never widens the standardized posterior") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Kernel kern{KernelKind::kMatern52, 1.0, 0.25, {}};
  for (int rep = 0; rep < 20; ++rep) {
    // Noise-free, so the standardized variance depends on the points alone.
    auto d = noisy_sine_data(gen, 6 + static_cast<std::size_t>(rep), 2, 0.0);
    const GprPosterior before(d, kern);
    d.add(std::vector<double>{U(gen), U(gen)}, U(gen), 0.0);
    const GprPosterior after(d, kern);
    for (int j = 0; j < 30; ++j) {
      const std::vector<double> q{U(gen), U(gen)};
      CHECK(after.stddev(q) / after.standardization().scale <=
            before.stddev(q) / before.standardization().scale + 1e-10);
    }
  }
}

TEST_CASE("nearly singular designs are rescued by jitter") {
  GprDataset d(1);
  for (int i = 0; i < 4; ++i) d.add(std::vector<double>{0.5}, 1.0 + i, 0.0);
  d.add(std::vector<double>{0.1}, 0.0, 0.0);
  const GprPosterior post(d, Kernel{KernelKind::kSquaredExponential, 1.0, 1.0, {}});
  CHECK(post.jitter() > 0.0);
  CHECK(std::isfinite(post.mean(std::vector<double>{0.3})));
}

TEST_CASE("hyperparameter recovery") {
  int hits = 0;
  const double truth = 0.3;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 gen(100 + seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> N(0.0, 1.0);
    const std::size_t n = 60;
    const Kernel truth_k{KernelKind::kSquaredExponential, 1.0, truth, {}};
    std::vector<std::vector<double>> pts(n, std::vector<double>(2));
    for (auto& p : pts) p = {U(gen), U(gen)};
    Eigen::MatrixXd K(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = truth_k(pts[i], pts[j]) + (i == j ? 1e-8 : 0.0);
    Eigen::VectorXd z(n);
    for (auto& x : z) x = N(gen);
    const Eigen::VectorXd f = Eigen::LLT<Eigen::MatrixXd>(K).matrixL() * z;
    GprDataset d(2);
    for (std::size_t i = 0; i < n; ++i) d.add(pts[i], f(static_cast<Eigen::Index>(i)) + 0.01 * N(gen), 1e-4);
    const auto fit = fit_hyperparameters(d, KernelKind::kSquaredExponential);
    CHECK(!fit.fallback);
    if (fit.kernel.length > truth / 2 && fit.kernel.length < truth * 2) ++hits;
  }
  CHECK(hits >= 3);
}

TEST_CASE("fitting ignores constant shifts and needs three points") {
  std::mt19937_64 gen(5);
  const auto d = noisy_sine_data(gen, 20, 2, 0.001);
  GprDataset shifted(2);
  for (std::size_t i = 0; i < d.size(); ++i) shifted.add(d.point(i), d.values()[i] + 1000.0, d.noises()[i]);
  const auto a = fit_hyperparameters(d, KernelKind::kMatern32);
  const auto b = fit_hyperparameters(shifted, KernelKind::kMatern32);
  CHECK(a.kernel.length == doctest::Approx(b.kernel.length).epsilon(1e-4));
  CHECK(a.kernel.sigma_c == doctest::Approx(b.kernel.sigma_c).epsilon(1e-4));
  CHECK(a.log_likelihood == doctest::Approx(b.log_likelihood).epsilon(1e-6));

  GprDataset two(1);
  two.add(std::vector<double>{0.0}, 1.0, 0.0);
  two.add(std::vector<double>{1.0}, 2.0, 0.0);
  CHECK_THROWS(fit_hyperparameters(two, KernelKind::kMatern32));
}

TEST_CASE("Nelder-Mead finds a quadratic minimum") {
  const auto [x, fx] = nelder_mead(
      [](const std::vector<double>& v) { return (v[0] - 1) * (v[0] - 1) + 3 * (v[1] + 2) * (v[1] + 2); }, {0, 0}, 0.5,
      1e-10, 5000);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(x[1] == doctest::Approx(-2.0).epsilon(1e-4));
  CHECK(fx < 1e-8);
}
