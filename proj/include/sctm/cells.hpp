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

#ifndef SCTM_CELLS_HPP
#define SCTM_CELLS_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace sctm {

// Cell formulas index the routes through a node by arm positions. The arms of
// a node are its neighbours in counter-clockwise order, so arm i+1 is the
// next exit after arm i; route (i, j) enters from arm i and leaves via arm j.

enum class CellKind {
  kHighway,
  kBidirectionalInterface,
  kPedestrianSquare,
  kSimplifiedIntersection,
  kSignalizedIntersection,
  kUniRoundabout,
  kBiRoundabout,
  kMultiPopRoundabout,
};

std::string_view to_string(CellKind kind);
std::optional<CellKind> parse_cell_kind(std::string_view name);

struct CellParams {
  double s_max = 1.0;
  double rho_max = 1.0;
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;
  double d = 1.0;
  double zeta = 0.1;
  // Signalized receiving capacity of each approach as a fraction of rho_max,
  // indexed by arm. Empty means 1/4 for every approach.
  std::vector<double> approach_capacity;

  bool operator==(const CellParams&) const = default;
};

/// Path-overlap coefficients of a symmetric four-arm roundabout. Receiving on
/// route (i, j) is reduced by weight(i, j, k, m) * rho(k, m) for every other
/// route (k, m), and its capacity is capacity(i, j) * rho_max.
class OverlapMatrix {
 public:
  static constexpr std::size_t kArms = 4;

  OverlapMatrix();

  /// Counter-clockwise one-way roundabout; (u,u+j) has capacity j/4.
  static OverlapMatrix unidirectional();
  /// Two-way pedestrian circle with shortest-path routing.
  static OverlapMatrix bidirectional();

  [[nodiscard]] double capacity(std::size_t from, std::size_t to) const { return capacity_[from * kArms + to]; }
  [[nodiscard]] double weight(std::size_t from, std::size_t to, std::size_t other_from, std::size_t other_to) const {
    return weights_[(from * kArms + to) * kArms * kArms + other_from * kArms + other_to];
  }
  void set_capacity(std::size_t from, std::size_t to, double fraction);
  void set_weight(std::size_t from, std::size_t to, std::size_t other_from, std::size_t other_to, double w);

  /// True when every coefficient is unchanged by rotating all arm indices by one.
  [[nodiscard]] bool rotation_invariant(double tol = 1e-15) const;

  bool operator==(const OverlapMatrix&) const = default;

 private:
  std::array<double, kArms * kArms> capacity_{};
  std::array<double, kArms * kArms * kArms * kArms> weights_{};
};

struct CellSpec {
  CellKind kind = CellKind::kHighway;
  CellParams params;
  // Used by the roundabout kinds only. Defaults to the matching built-in table.
  std::optional<OverlapMatrix> overlap;

  /// Checks parameter ranges and that the kind supports a node with `arms` arms.
  void validate(std::size_t arms) const;
  /// Overlap table in effect (explicit one, else the kind's default).
  [[nodiscard]] const OverlapMatrix& overlap_table() const;

  bool operator==(const CellSpec&) const = default;
};

/// Densities of every route through one node, stored as an arms x arms table
/// (row = entry arm, column = exit arm). Absent routes hold 0.
class LocalDensities {
 public:
  LocalDensities(std::size_t arms, std::span<const double> values);

  [[nodiscard]] std::size_t arms() const noexcept { return arms_; }
  [[nodiscard]] double operator()(std::size_t from, std::size_t to) const { return values_[from * arms_ + to]; }
  [[nodiscard]] double total() const;

 private:
  std::size_t arms_;
  std::span<const double> values_;
};

/// Per-route traffic-light adjustment at one node, arms x arms, each in [0, 1].
class LightAdjust {
 public:
  LightAdjust(std::size_t arms, std::span<const double> values);
  [[nodiscard]] std::size_t arms() const noexcept { return arms_; }
  [[nodiscard]] double operator()(std::size_t from, std::size_t to) const { return values_[from * arms_ + to]; }

 private:
  std::size_t arms_;
  std::span<const double> values_;
};

/// Sending function S of route (from, to). `light` must be given exactly when
/// the cell is a signalized intersection.
double sending(const CellSpec& cell, std::size_t from, std::size_t to, const LocalDensities& rho,
               const LightAdjust* light = nullptr);

/// Receiving function R of route (from, to).
double receiving(const CellSpec& cell, std::size_t from, std::size_t to, const LocalDensities& rho);

// ---------------------------------------------------------------------------
// Two-population roundabout (vehicles and pedestrians).

struct MultiPopCell {
  CellParams vehicle;
  CellParams pedestrian;
  OverlapMatrix overlap = OverlapMatrix::unidirectional();
};

enum class Population { kVehicle, kPedestrian };

struct SendReceive {
  double sending = 0.0;
  double receiving = 0.0;
};

/// S and R of route (from, to) for one population. Pedestrians only use the
/// routes to the adjacent exits (to = from +/- 1); other pedestrian routes get 0.
SendReceive multipop_sending_receiving(const MultiPopCell& cell, std::size_t from, std::size_t to,
                                       Population population, const LocalDensities& vehicles,
                                       const LocalDensities& pedestrians);

}  // namespace sctm

#endif  // SCTM_CELLS_HPP
