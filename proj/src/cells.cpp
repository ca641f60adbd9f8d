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

#include "sctm/cells.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sctm/errors.hpp"

namespace sctm {
namespace {

constexpr std::size_t kRing = OverlapMatrix::kArms;

struct RelativeWeight {
  std::size_t other_from;  // offsets relative to the route's entry arm
  std::size_t other_to;
  double weight;
};

OverlapMatrix from_relative(const std::array<double, kRing>& capacity,
                            const std::array<std::vector<RelativeWeight>, kRing>& table) {
  OverlapMatrix m;
  for (std::size_t u = 0; u < kRing; ++u) {
    for (std::size_t j = 1; j < kRing; ++j) {
      const std::size_t to = (u + j) % kRing;
      m.set_capacity(u, to, capacity[j]);
      for (const auto& rw : table[j]) {
        m.set_weight(u, to, (u + rw.other_from) % kRing, (u + rw.other_to) % kRing, rw.weight);
      }
    }
  }
  return m;
}

void require_arms(const CellSpec& cell, std::size_t arms, std::size_t expected) {
  if (arms != expected) {
    throw ConfigError(std::string(to_string(cell.kind)) + " cell needs " + std::to_string(expected) +
                      " arms, node has " + std::to_string(arms));
  }
}

void check_route(const LocalDensities& rho, std::size_t from, std::size_t to) {
  if (from >= rho.arms() || to >= rho.arms()) throw std::out_of_range("route arm index outside node");
}

double overlap_receiving(const CellParams& p, const OverlapMatrix& m, std::size_t from, std::size_t to,
                         const LocalDensities& rho) {
  double overlap = 0.0;
  for (std::size_t k = 0; k < kRing; ++k) {
    for (std::size_t l = 0; l < kRing; ++l) {
      const double w = m.weight(from, to, k, l);
      if (w != 0.0) overlap += w * rho(k, l);
    }
  }
  return std::max(p.b * (m.capacity(from, to) * p.rho_max - p.c * rho(from, to) - p.d * overlap), 0.0);
}

}  // namespace

std::string_view to_string(CellKind kind) {
  switch (kind) {
    case CellKind::kHighway:
      return "highway";
    case CellKind::kBidirectionalInterface:
      return "bidirectional_interface";
    case CellKind::kPedestrianSquare:
      return "pedestrian_square";
    case CellKind::kSimplifiedIntersection:
      return "simplified_intersection";
    case CellKind::kSignalizedIntersection:
      return "signalized_intersection";
    case CellKind::kUniRoundabout:
      return "uni_roundabout";
    case CellKind::kBiRoundabout:
      return "bi_roundabout";
    case CellKind::kMultiPopRoundabout:
      return "multipop_roundabout";
  }
  return "unknown";
}

std::optional<CellKind> parse_cell_kind(std::string_view name) {
  for (auto k : {CellKind::kHighway, CellKind::kBidirectionalInterface, CellKind::kPedestrianSquare,
                 CellKind::kSimplifiedIntersection, CellKind::kSignalizedIntersection, CellKind::kUniRoundabout,
                 CellKind::kBiRoundabout, CellKind::kMultiPopRoundabout}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

OverlapMatrix::OverlapMatrix() { capacity_.fill(0.0); weights_.fill(0.0); }

OverlapMatrix OverlapMatrix::unidirectional() {
  constexpr double h = 1.0 / 2.0, t = 1.0 / 3.0, tt = 2.0 / 3.0;
  return from_relative({0.0, 0.25, 0.5, 0.75},
                       {{{},
                         {{0, 2, h}, {0, 3, t}, {2, 1, t}, {3, 1, h}, {3, 2, t}},
                         {{0, 1, 1}, {0, 3, tt}, {1, 2, 1}, {1, 3, h}, {1, 0, t}, {2, 1, t}, {3, 1, h}, {3, 2, tt}},
                         {{0, 1, 1},
                          {0, 2, 1},
                          {1, 2, 1},
                          {1, 3, 1},
                          {1, 0, tt},
                          {2, 3, 1},
                          {2, 0, h},
                          {2, 1, t},
                          {3, 1, h},
                          {3, 2, tt}}}});
}

OverlapMatrix OverlapMatrix::bidirectional() {
  constexpr double q = 0.25;
  std::vector<RelativeWeight> straight;
  for (std::size_t k = 1; k < kRing; ++k) {
    for (std::size_t l = 0; l < kRing; ++l) {
      if (l != 2 && l != k) straight.push_back({k, l, 1.0});
    }
  }
  return from_relative({0.0, 0.25, 1.0, 0.25},
                       {{{},
                         {{0, 2, q}, {1, 0, 1}, {1, 3, q}, {2, 0, q}, {3, 1, q}},
                         straight,
                         {{0, 2, q}, {1, 3, q}, {2, 0, q}, {3, 0, 1}, {3, 1, q}}}});
}

void OverlapMatrix::set_capacity(std::size_t from, std::size_t to, double fraction) {
  if (from >= kArms || to >= kArms) throw std::out_of_range("overlap capacity index");
  capacity_[from * kArms + to] = fraction;
}

void OverlapMatrix::set_weight(std::size_t from, std::size_t to, std::size_t other_from, std::size_t other_to,
                               double w) {
  if (from >= kArms || to >= kArms || other_from >= kArms || other_to >= kArms) {
    throw std::out_of_range("overlap weight index");
  }
  if (from == other_from && to == other_to) throw std::invalid_argument("self overlap is carried by c, not d");
  weights_[(from * kArms + to) * kArms * kArms + other_from * kArms + other_to] = w;
}

bool OverlapMatrix::rotation_invariant(double tol) const {
  for (std::size_t i = 0; i < kArms; ++i) {
    for (std::size_t j = 0; j < kArms; ++j) {
      const std::size_t ri = (i + 1) % kArms, rj = (j + 1) % kArms;
      if (std::abs(capacity(i, j) - capacity(ri, rj)) > tol) return false;
      for (std::size_t k = 0; k < kArms; ++k) {
        for (std::size_t l = 0; l < kArms; ++l) {
          if (std::abs(weight(i, j, k, l) - weight(ri, rj, (k + 1) % kArms, (l + 1) % kArms)) > tol) return false;
        }
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

void CellSpec::validate(std::size_t arms) const {
  const auto& p = params;
  const std::string name(to_string(kind));
  auto fail = [&](const std::string& what) { throw ConfigError(name + " cell: " + what); };
  if (!(p.s_max > 0)) fail("s_max must be > 0");
  if (!(p.rho_max > 0)) fail("rho_max must be > 0");
  if (!(p.a > 0 && p.a <= 1)) fail("a must lie in (0, 1]");
  if (!(p.b > 0 && p.b <= 1)) fail("b must lie in (0, 1]");
  if (!(p.c > 0)) fail("c must be > 0");
  const bool uses_d = kind == CellKind::kBidirectionalInterface || kind == CellKind::kPedestrianSquare ||
                      kind == CellKind::kUniRoundabout || kind == CellKind::kBiRoundabout;
  const bool uses_zeta = kind == CellKind::kSimplifiedIntersection || kind == CellKind::kSignalizedIntersection;
  if (uses_d && !(p.d > 0)) fail("d must be > 0");
  if (uses_zeta && !(p.zeta > 0)) fail("zeta must be > 0");
  if (arms == 0 && kind != CellKind::kMultiPopRoundabout) return;  // isolated node: no routes

  switch (kind) {
    case CellKind::kHighway:
    case CellKind::kBidirectionalInterface:
      require_arms(*this, arms, 2);
      break;
    case CellKind::kPedestrianSquare:
    case CellKind::kSimplifiedIntersection:
      break;  // any number of arms; a single arm is a dead end
    case CellKind::kSignalizedIntersection:
      require_arms(*this, arms, 4);
      if (!p.approach_capacity.empty()) {
        if (p.approach_capacity.size() != arms) fail("approach_capacity needs one entry per arm");
        for (double f : p.approach_capacity) {
          if (!(f > 0)) fail("approach capacities must be > 0");
        }
      }
      break;
    case CellKind::kUniRoundabout:
    case CellKind::kBiRoundabout:
      require_arms(*this, arms, 4);
      break;
    case CellKind::kMultiPopRoundabout:
      fail("requires a vehicle and a pedestrian layer; use multipop_sending_receiving");
  }
}

const OverlapMatrix& CellSpec::overlap_table() const {
  static const OverlapMatrix uni = OverlapMatrix::unidirectional();
  static const OverlapMatrix bi = OverlapMatrix::bidirectional();
  if (overlap) return *overlap;
  return kind == CellKind::kBiRoundabout ? bi : uni;
}

LocalDensities::LocalDensities(std::size_t arms, std::span<const double> values) : arms_{arms}, values_{values} {
  if (values.size() != arms * arms) {
    throw std::invalid_argument("local density table must hold arms*arms entries");
  }
}

double LocalDensities::total() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

LightAdjust::LightAdjust(std::size_t arms, std::span<const double> values) : arms_{arms}, values_{values} {
  if (values.size() != arms * arms) throw std::invalid_argument("light table must hold arms*arms entries");
}

double sending(const CellSpec& cell, std::size_t from, std::size_t to, const LocalDensities& rho,
               const LightAdjust* light) {
  check_route(rho, from, to);
  const auto& p = cell.params;
  const bool signalized = cell.kind == CellKind::kSignalizedIntersection;
  if (signalized && light == nullptr) throw std::invalid_argument("signalized cell needs a signal state");
  if (!signalized && light != nullptr) throw std::invalid_argument("signal state given for an unsignalized cell");
  const double own = rho(from, to);

  switch (cell.kind) {
    case CellKind::kHighway:
    case CellKind::kBidirectionalInterface:
    case CellKind::kPedestrianSquare:
    case CellKind::kUniRoundabout:
    case CellKind::kBiRoundabout:
      return std::min(p.s_max, p.a * own);
    case CellKind::kSimplifiedIntersection:
      return std::min(p.s_max, p.a * own * std::exp(-p.zeta * rho.total()));
    case CellKind::kSignalizedIntersection: {
      if (light->arms() != rho.arms()) throw std::invalid_argument("signal state does not match node arms");
      const std::size_t n = rho.arms();
      const double la = (*light)(from, to);
      double s = p.a * la * own;
      if (to == (from + 3) % n) {
        const std::size_t opposite = (from + 2) % n;
        s *= std::exp(-p.zeta * (rho(opposite, from) + rho(opposite, (from + 3) % n)));
      }
      return std::min(p.s_max, s);
    }
    case CellKind::kMultiPopRoundabout:
      break;
  }
  throw std::invalid_argument("multi-population roundabout needs multipop_sending_receiving");
}

double receiving(const CellSpec& cell, std::size_t from, std::size_t to, const LocalDensities& rho) {
  check_route(rho, from, to);
  const auto& p = cell.params;
  const double own = rho(from, to);

  switch (cell.kind) {
    case CellKind::kHighway:
      return std::max(p.b * (p.rho_max / 2.0 - p.c * own), 0.0);
    case CellKind::kBidirectionalInterface:
      return std::max(p.b * (p.rho_max - p.c * own - p.d * rho(to, from)), 0.0);
    case CellKind::kPedestrianSquare: {
      double others = 0.0;
      for (std::size_t k = 0; k < rho.arms(); ++k) {
        if (k == from) continue;
        for (std::size_t l = 0; l < rho.arms(); ++l) {
          if (l != to) others += rho(k, l);
        }
      }
      return std::max(p.b * (p.rho_max - p.c * own - p.d * others), 0.0);
    }
    case CellKind::kSimplifiedIntersection:
      return std::max(p.b * (p.rho_max - p.c * rho.total()), 0.0);
    case CellKind::kSignalizedIntersection: {
      const double fraction = p.approach_capacity.empty() ? 0.25 : p.approach_capacity.at(from);
      double queued = 0.0;
      for (std::size_t l = 0; l < rho.arms(); ++l) queued += rho(from, l);
      return std::max(p.b * (fraction * p.rho_max - queued), 0.0);
    }
    case CellKind::kUniRoundabout:
    case CellKind::kBiRoundabout:
      if (rho.arms() != kRing) throw std::invalid_argument("roundabout needs 4 arms");
      return overlap_receiving(p, cell.overlap_table(), from, to, rho);
    case CellKind::kMultiPopRoundabout:
      break;
  }
  throw std::invalid_argument("multi-population roundabout needs multipop_sending_receiving");
}

SendReceive multipop_sending_receiving(const MultiPopCell& cell, std::size_t from, std::size_t to,
                                       Population population, const LocalDensities& vehicles,
                                       const LocalDensities& pedestrians) {
  if (vehicles.arms() != kRing || pedestrians.arms() != kRing) {
    throw std::invalid_argument("multi-population roundabout needs both 4-arm density layers");
  }
  check_route(vehicles, from, to);
  auto prev = [](std::size_t i) { return (i + kRing - 1) % kRing; };
  auto next = [](std::size_t i) { return (i + 1) % kRing; };

  if (population == Population::kPedestrian) {
    if (to != prev(from) && to != next(from)) return {};
    const auto& p = cell.pedestrian;
    return {std::min(p.s_max, p.a * pedestrians(from, to)),
            std::max(p.b * (p.rho_max / 4.0 - p.c * pedestrians(from, to) - p.d * pedestrians(to, from)), 0.0)};
  }

  if (to == from) return {};
  const auto& p = cell.vehicle;
  const bool exit_clear = pedestrians(prev(to), to) + pedestrians(to, prev(to)) == 0.0;
  const bool entry_clear = pedestrians(from, next(from)) + pedestrians(next(from), from) == 0.0;
  const double s = std::min(p.s_max, p.a * vehicles(from, to));
  const double r = overlap_receiving(p, cell.overlap, from, to, vehicles);
  return {exit_clear ? s : 0.0, entry_clear ? r : 0.0};
}

}  // namespace sctm
