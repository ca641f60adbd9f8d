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

#include "sctm/active_learning.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include <boost/random/sobol.hpp>

#include "sctm/errors.hpp"
#include "sctm/simd.hpp"

namespace sctm {

double Box::volume() const {
  double v = 1.0;
  for (std::size_t d = 0; d < dim(); ++d) v *= upper[d] - lower[d];
  return v;
}

bool Box::contains(std::span<const double> k) const {
  if (k.size() != dim()) return false;
  for (std::size_t d = 0; d < dim(); ++d)
    if (!(k[d] >= lower[d] && k[d] <= upper[d])) return false;
  return true;
}

void Box::from_unit(const double* u, double* k) const {
  for (std::size_t d = 0; d < dim(); ++d) k[d] = lower[d] + u[d] * (upper[d] - lower[d]);
}

std::vector<double> Box::uniform(RngStream& rng) const {
  std::vector<double> k(dim());
  for (std::size_t d = 0; d < dim(); ++d) k[d] = lower[d] + rng.uniform() * (upper[d] - lower[d]);
  return k;
}

void Box::validate() const {
  if (lower.empty() || lower.size() != upper.size()) throw ConfigError("box: bounds must be non-empty and of equal size");
  for (std::size_t d = 0; d < dim(); ++d)
    if (!std::isfinite(lower[d]) || !std::isfinite(upper[d]) || !(lower[d] < upper[d]))
      throw ConfigError("box: dimension " + std::to_string(d) + " needs finite lower < upper");
}

double acquisition(double m, double sd, double gamma, double c2, AcquisitionKind kind) {
  double dist = std::abs(m - gamma);
  if (kind == AcquisitionKind::kScaled) {
    if (sd <= 0.0) return dist == 0.0 ? 0.5 : 0.0;
    dist /= sd;
  }
  return normal_cdf(-c2 * dist);
}

void LoopConfig::validate() const {
  if (n_initial < 3) throw ConfigError("learning: n_initial must be at least 3");
  if (n_loop == 0 && iterations > 0) throw ConfigError("learning: n_loop must be positive");
  if (tau.empty() || n_max.empty()) throw ConfigError("learning: tau and n_max schedules must be non-empty");
  for (double t : tau)
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("learning: tau entries must be positive");
  for (std::size_t n : n_max)
    if (n < n_min || n < 2) throw ConfigError("learning: n_max entries must be >= max(n_min, 2)");
  if (n_min < 2) throw ConfigError("learning: n_min must be at least 2");
  if (!(c1 >= 0.0)) throw ConfigError("learning: c1 must be non-negative");
  if (!(c2_0 > 0.0)) throw ConfigError("learning: c2 must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("learning: delta must lie in (0, 1)");
  if (n_eval == 0) throw ConfigError("learning: n_eval must be positive");
  if (max_trials == 0) throw ConfigError("learning: max_trials must be positive");
  if (fit_starts == 0) throw ConfigError("learning: fit_starts must be positive");
  if (error_stop && !(*error_stop >= 0.0)) throw ConfigError("learning: error_stop must be non-negative");
}

// ---- bands ---------------------------------------------------------------------

BandFn pointwise_band(std::shared_ptr<const GprPosterior> posterior, double delta) {
  // delta = 1 is the degenerate zero-width band.
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("pointwise_band: delta must lie in (0, 1]");
  const double z = normal_quantile(1.0 - delta / 2.0);
  return [posterior = std::move(posterior), z](const double* pts, std::size_t m, double* lo, double* hi) {
    std::vector<double> sd(m);
    posterior->predict(pts, m, lo, sd.data());
    for (std::size_t j = 0; j < m; ++j) {
      const double mean = lo[j];
      lo[j] = mean - z * sd[j];
      hi[j] = mean + z * sd[j];
    }
  };
}

BandFn local_band(const GprPosterior& posterior, std::span<const double> k_star, double lipschitz, double eps,
                  double delta, const Box& box) {
  if (k_star.size() != box.dim()) throw std::invalid_argument("local_band: dimension mismatch");
  if (!(lipschitz >= 0.0) || !(eps > 0.0)) throw std::invalid_argument("local_band: need L >= 0 and eps > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("local_band: delta must lie in (0, 1)");
  for (std::size_t d = 0; d < box.dim(); ++d)
    if (k_star[d] - eps < box.lower[d] || k_star[d] + eps > box.upper[d])
      throw std::invalid_argument("local_band: ball around k* leaves the design box");
  const Prediction p = posterior.predict(k_star);
  const double half = normal_quantile(1.0 - delta / 2.0) * p.sd;
  std::vector<double> center(k_star.begin(), k_star.end());
  return [center = std::move(center), mean = p.mean, half, lipschitz](const double* pts, std::size_t m, double* lo,
                                                                      double* hi) {
    const std::size_t dim = center.size();
    for (std::size_t j = 0; j < m; ++j) {
      double r2 = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double e = pts[j * dim + d] - center[d];
        r2 += e * e;
      }
      const double w = half + lipschitz * std::sqrt(r2);
      lo[j] = mean - w;
      hi[j] = mean + w;
    }
  };
}

// ---- Sobol points and the error bound ------------------------------------------------

SobolStream::SobolStream(std::size_t dim) : dim_{dim} {
  if (dim == 0) throw std::invalid_argument("SobolStream: dimension must be positive");
}

std::span<const double> SobolStream::points(std::size_t n) {
  if (n > skip_) {
    // boost's sobol engine starts at the first non-zero point (0.5, ..., 0.5)
    boost::random::sobol engine(dim_);
    engine.discard(skip_ * dim_);
    cache_.resize(n * dim_);
    for (std::size_t i = static_cast<std::size_t>(skip_) * dim_; i < n * dim_; ++i)
      cache_[i] = static_cast<double>(engine()) * 0x1p-64;
    skip_ = n;
  }
  return {cache_.data(), n * dim_};
}

double nikodym_bound_mc(const BandFn& band, double gamma, const Box& box, SobolStream& sobol, std::size_t n_eval) {
  if (sobol.dim() != box.dim()) throw std::invalid_argument("nikodym_bound_mc: dimension mismatch");
  if (n_eval == 0) throw std::invalid_argument("nikodym_bound_mc: n_eval must be positive");
  const std::size_t dim = box.dim();
  const auto unit = sobol.points(n_eval);
  const auto& kernels = simd::active_kernels();
  constexpr std::size_t kChunk = 4096;
  std::vector<double> pts(kChunk * dim), lo(kChunk), hi(kChunk);
  std::size_t count = 0;
  for (std::size_t start = 0; start < n_eval; start += kChunk) {
    const std::size_t m = std::min(kChunk, n_eval - start);
    for (std::size_t j = 0; j < m; ++j) box.from_unit(unit.data() + (start + j) * dim, pts.data() + j * dim);
    band(pts.data(), m, lo.data(), hi.data());
    count += kernels.band_count(lo.data(), hi.data(), gamma, m);
  }
  return box.volume() * static_cast<double>(count) / static_cast<double>(n_eval);
}

SandwichMembership sandwich(double lower, double mean, double upper, double gamma) {
  if (lower > upper) throw std::invalid_argument("sandwich: lower band above upper band");
  return {lower >= gamma, mean >= gamma, upper >= gamma};
}

SandwichMembership LevelSetEstimate::membership(std::span<const double> k) const {
  const Prediction p = posterior->predict(k);
  const double z = normal_quantile(1.0 - delta / 2.0);
  return sandwich(p.mean - z * p.sd, p.mean, p.mean + z * p.sd, gamma);
}

// ---- the loop ----------------------------------------------------------------

std::vector<std::vector<double>> rejection_sample(std::size_t n, const GprPosterior& posterior, const Box& box,
                                                  double gamma, double tau, double c1, double c2,
                                                  AcquisitionKind kind, std::size_t max_trials, RngStream& rng,
                                                  std::size_t* skipped) {
  std::vector<std::vector<double>> out;
  out.reserve(n);
  const double sd_floor = c1 * tau;
  for (std::size_t p = 0; p < n; ++p) {
    bool found = false;
    for (std::size_t trial = 0; trial < max_trials && !found; ++trial) {
      std::vector<double> k = box.uniform(rng);
      const double u = rng.uniform();
      double m = 0.0, sd = -1.0;
      if (kind == AcquisitionKind::kScaled) {
        const Prediction pr = posterior.predict(k);
        m = pr.mean;
        sd = pr.sd;
      } else {
        posterior.predict_mean(k.data(), 1, &m);
      }
      if (!(u < 2.0 * acquisition(m, sd, gamma, c2, kind))) continue;
      if (sd < 0.0) sd = posterior.stddev(k);
      if (sd_floor < sd) {
        out.push_back(std::move(k));
        found = true;
      }
    }
    if (!found) {
      if (skipped) *skipped = n - p;
      return out;
    }
  }
  if (skipped) *skipped = 0;
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

ActiveLearningResult run_active_learning(const LoopConfig& config, const Box& box, const PointEvaluator& evaluate,
                                         double gamma, std::uint64_t seed,
                                         const std::function<void(const IterationReport&)>& observer) {
  config.validate();
  box.validate();
  if (!evaluate) throw std::invalid_argument("run_active_learning: no evaluator");

  const std::size_t dim = box.dim();
  RngStream design_rng(seed, 0);
  SobolStream sobol(dim);
  GprDataset data(dim);
  ActiveLearningResult result;
  std::uint64_t counter = 0;

  auto evaluate_batch = [&](const std::vector<std::vector<double>>& pts, std::size_t it) {
    const SequentialOptions opt{config.tau_at(it), config.n_min, config.n_max_at(it), config.c3, 1};
    std::vector<Observation> obs(pts.size());
    const std::uint64_t base = counter;
    parallel_for(0, pts.size(), config.workers, [&](std::size_t i) {
      obs[i].iteration = it;
      obs[i].index = base + i;
      obs[i].k = pts[i];
      obs[i].estimate = evaluate(PointRequest{obs[i].k, base + i, opt});
    });
    counter += pts.size();
    const std::size_t first = result.observations.size();
    for (auto& o : obs) {
      if (!o.estimate.discarded) data.add(o.k, o.estimate.mu_hat, o.estimate.tau_sq);
      result.observations.push_back(std::move(o));
    }
    return first;
  };

  auto finish_iteration = [&](std::size_t it, std::shared_ptr<const GprPosterior> post, std::size_t first,
                              std::size_t proposed, std::size_t skipped, Clock::time_point t0, bool last) {
    LevelSetEstimate est;
    est.iteration = it;
    est.posterior = std::move(post);
    est.gamma = gamma;
    est.delta = config.delta;
    est.box = box;
    est.dataset_size = data.size();
    if (config.error_every_iteration || config.error_stop || last)
      est.error_bound = nikodym_bound_mc(est.band(), gamma, box, sobol, config.n_eval);
    result.estimates.push_back(std::move(est));
    if (observer) {
      const std::span<const Observation> added(result.observations.data() + first, result.observations.size() - first);
      observer(IterationReport{result.estimates.back(), added, proposed, skipped, seconds_since(t0)});
    }
  };

  // Phase 1: uniform design, one kernel fit.
  auto t0 = Clock::now();
  std::vector<std::vector<double>> initial(config.n_initial);
  for (auto& k : initial) k = box.uniform(design_rng);
  std::size_t first = evaluate_batch(initial, 0);

  FitOptions fit;
  fit.starts = config.fit_starts;
  fit.seed = derive_seed(seed, 0xf17);
  for (std::size_t d = 0; d < dim; ++d) fit.input_scale.push_back(box.upper[d] - box.lower[d]);
  result.fit = fit_hyperparameters(data, config.kernel, fit);
  const Kernel kernel = result.fit.kernel;

  auto posterior = std::make_shared<const GprPosterior>(data, kernel);
  const Standardization phase1 = posterior->standardization();  // frozen with the kernel
  finish_iteration(0, posterior, first, initial.size(), 0, t0, config.iterations == 0);
  if (config.error_stop && *result.estimates.back().error_bound <= *config.error_stop) return result;

  // Phase 2: acquisition-driven refinement with the kernel frozen.
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    t0 = Clock::now();
    std::size_t skipped = 0;
    const auto pts = rejection_sample(config.n_loop, *posterior, box, gamma, config.tau_at(it), config.c1,
                                      config.c2_at(it), config.acquisition, config.max_trials, design_rng, &skipped);
    if (skipped > 0)
      warn("iteration " + std::to_string(it) + ": " + std::to_string(skipped) +
           " points not found within the trial cap");
    first = evaluate_batch(pts, it);
    posterior = std::make_shared<const GprPosterior>(data, kernel, phase1);
    const bool last = it == config.iterations;
    finish_iteration(it, posterior, first, pts.size(), skipped, t0, last);
    if (config.error_stop && *result.estimates.back().error_bound <= *config.error_stop) break;
  }
  return result;
}

}  // namespace sctm
