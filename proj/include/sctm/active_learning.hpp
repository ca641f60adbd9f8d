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

#ifndef SCTM_ACTIVE_LEARNING_HPP
#define SCTM_ACTIVE_LEARNING_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "sctm/evaluation.hpp"
#include "sctm/gpr.hpp"
#include "sctm/rng.hpp"

namespace sctm {

/// Axis-aligned design box.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  [[nodiscard]] std::size_t dim() const noexcept { return lower.size(); }
  [[nodiscard]] double volume() const;
  [[nodiscard]] bool contains(std::span<const double> k) const;
  /// lower + u * (upper - lower), coordinate-wise.
  void from_unit(const double* u, double* k) const;
  [[nodiscard]] std::vector<double> uniform(RngStream& rng) const;
  void validate() const;  // throws ConfigError
};

enum class AcquisitionKind { kDistance, kScaled };

/// Phi(-c2 |m - gamma|), or with the distance divided by sd for kScaled.
double acquisition(double m, double sd, double gamma, double c2, AcquisitionKind kind = AcquisitionKind::kDistance);

struct LoopConfig {
  std::size_t n_initial = 150;
  std::size_t n_loop = 50;
  std::size_t iterations = 7;  // Phase-2 iterations after the initial fit
  std::vector<double> tau{0.05};  // absolute target std-devs per iteration; the last repeats
  std::size_t n_min = 20;
  std::vector<std::size_t> n_max{500};  // per iteration; the last repeats
  double c1 = 5.0;
  double c2_0 = 1.0;  // c2 of iteration i is c2_0 * i
  double c3 = 2.0;
  AcquisitionKind acquisition = AcquisitionKind::kDistance;
  std::size_t max_trials = 100000;
  double delta = 0.05;
  std::size_t n_eval = 100000;
  std::optional<double> error_stop;
  bool error_every_iteration = true;  // else only for the last estimate
  KernelKind kernel = KernelKind::kMatern32;
  std::size_t fit_starts = 10;
  unsigned workers = 1;

  [[nodiscard]] double tau_at(std::size_t i) const { return tau[std::min(i, tau.size() - 1)]; }
  [[nodiscard]] std::size_t n_max_at(std::size_t i) const { return n_max[std::min(i, n_max.size() - 1)]; }
  [[nodiscard]] double c2_at(std::size_t i) const { return c2_0 * static_cast<double>(i); }
  void validate() const;  // throws ConfigError
};

// ---- bands and error bounds ----------------------------------------------------------

/// Lower and upper band values at m row-major points.
using BandFn = std::function<void(const double* points, std::size_t m, double* lower, double* upper)>;

/// m(k) -+ Phi^{-1}(1 - delta/2) sd(k).
BandFn pointwise_band(std::shared_ptr<const GprPosterior> posterior, double delta);

/// m(k*) -+ (Phi^{-1}(1 - delta/2) sd(k*) + L |k - k*|), valid on the ball of
/// radius eps around k*, which must lie inside `box`.
BandFn local_band(const GprPosterior& posterior, std::span<const double> k_star, double lipschitz, double eps,
                  double delta, const Box& box);

/// Fixed Sobol sequence on the unit cube, cached and extended on demand.
class SobolStream {
 public:
  explicit SobolStream(std::size_t dim);
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  /// First n points, row-major.
  std::span<const double> points(std::size_t n);

 private:
  std::size_t dim_;
  std::vector<double> cache_;
  std::uint64_t skip_ = 0;
};

/// vol(D)/n * #{j < n : upper(k_j) >= gamma > lower(k_j)} over the first n
/// Sobol points mapped into the box.
double nikodym_bound_mc(const BandFn& band, double gamma, const Box& box, SobolStream& sobol, std::size_t n_eval);

struct SandwichMembership {
  bool inner = false;  // lower >= gamma
  bool estimate = false;
  bool outer = false;  // upper >= gamma
};

/// Membership of one point in D_-, D and D_+; throws if lower > upper.
SandwichMembership sandwich(double lower, double mean, double upper, double gamma);

// ---- the loop ----------------------------------------------------------------

struct LevelSetEstimate {
  std::size_t iteration = 0;
  std::shared_ptr<const GprPosterior> posterior;
  double gamma = 0.0;
  double delta = 0.05;
  Box box;
  std::optional<double> error_bound;  // e-hat
  std::size_t dataset_size = 0;

  [[nodiscard]] Prediction predict(std::span<const double> k) const { return posterior->predict(k); }
  [[nodiscard]] SandwichMembership membership(std::span<const double> k) const;
  [[nodiscard]] bool member(std::span<const double> k) const { return membership(k).estimate; }
  [[nodiscard]] BandFn band() const { return pointwise_band(posterior, delta); }
};

struct Observation {
  std::size_t iteration = 0;
  std::uint64_t index = 0;  // global point counter; seeds the replicates
  std::vector<double> k;
  SequentialEstimate estimate;
};

struct PointRequest {
  std::span<const double> k;
  std::uint64_t index;
  SequentialOptions options;
};

using PointEvaluator = std::function<SequentialEstimate(const PointRequest&)>;

struct IterationReport {
  const LevelSetEstimate& estimate;
  std::span<const Observation> added;  // incl. discarded points
  std::size_t proposed = 0;
  std::size_t skipped = 0;  // points not found within the trial cap
  double seconds = 0.0;
};

struct ActiveLearningResult {
  FitResult fit;
  std::vector<Observation> observations;  // every evaluated point, in order
  std::vector<LevelSetEstimate> estimates;
};

/// Rejection sampling of up to n points: a uniform candidate is accepted with
/// probability 2 I(k) and kept when c1 * tau < sd(k). Once one point exhausts
/// max_trials the remaining points are skipped as well (the candidate law does
/// not change within an iteration). Returns the accepted points.
std::vector<std::vector<double>> rejection_sample(std::size_t n, const GprPosterior& posterior, const Box& box,
                                                  double gamma, double tau, double c1, double c2,
                                                  AcquisitionKind kind, std::size_t max_trials, RngStream& rng,
                                                  std::size_t* skipped = nullptr);

/// Algorithm-1 loop. Phase 1 evaluates n_initial uniform points, fits the
/// kernel once and freezes it; each later iteration proposes n_loop points,
/// evaluates them, drops the discarded ones and refits the posterior on the
/// cumulative data. Kernel inputs are the box coordinates divided by the box
/// side lengths.
ActiveLearningResult run_active_learning(const LoopConfig& config, const Box& box, const PointEvaluator& evaluate,
                                         double gamma, std::uint64_t seed,
                                         const std::function<void(const IterationReport&)>& observer = {});

}  // namespace sctm

#endif  // SCTM_ACTIVE_LEARNING_HPP
