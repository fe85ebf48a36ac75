// Copyright 2026 The vsasrl Authors
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

#include "vsasrl/workspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <tuple>

namespace vsasrl {

std::vector<Vec2> Rect::cell_centers(double cell) const {
  std::vector<Vec2> out;
  if (empty() || !(cell > 0.0)) return out;
  const auto nx = static_cast<long>(std::ceil((x_max - x_min) / cell - 1e-9));
  const auto ny = static_cast<long>(std::ceil((y_max - y_min) / cell - 1e-9));
  out.reserve(static_cast<std::size_t>(nx * ny));
  for (long j = 0; j < ny; ++j) {
    const double y = std::min(y_min + (static_cast<double>(j) + 0.5) * cell, y_max);
    for (long i = 0; i < nx; ++i) {
      const double x = std::min(x_min + (static_cast<double>(i) + 0.5) * cell, x_max);
      out.emplace_back(x, y);
    }
  }
  return out;
}

void WorkspaceSpec::layout(double main_x_min, double midline_gap) {
  const double near = A + B;
  const double far = near + C;
  main_region = {main_x_min, main_x_min + D, near, far};
  cooperative_region = {main_x_min, std::min(-midline_gap, main_x_min + D), near, far};
  human_region = {B, B + D, 0.0, E};
}

WorkspaceSpec WorkspaceSpec::defaults(double main_x_min, double midline_gap) {
  WorkspaceSpec s;
  s.layout(main_x_min, midline_gap);
  return s;
}

std::vector<std::string> violations(const WorkspaceSpec& s, const std::string& prefix) {
  std::vector<std::string> out;
  auto require = [&](bool ok, const std::string& field, const char* what) {
    if (!ok) out.push_back(prefix + "." + field + ": " + what);
  };
  for (auto [v, name] : {std::pair{s.A, "A"}, {s.B, "B"}, {s.C, "C"}, {s.D, "D"}, {s.E, "E"}})
    require(std::isfinite(v) && v > 0.0, name, "must be finite and > 0");
  auto finite_rect = [](const Rect& r) {
    return std::isfinite(r.x_min) && std::isfinite(r.x_max) && std::isfinite(r.y_min) &&
           std::isfinite(r.y_max);
  };
  require(finite_rect(s.main_region) && !s.main_region.empty(), "main_region",
          "must be finite and non-degenerate");
  require(finite_rect(s.human_region) && !s.human_region.empty(), "human_region",
          "must be finite and non-degenerate");
  require(finite_rect(s.cooperative_region), "cooperative_region", "must be finite");
  require(s.main_region.contains(s.cooperative_region), "cooperative_region",
          "must lie inside main_region");
  require(std::isfinite(s.theta1_cap_deg) && s.theta1_cap_deg > 0.0, "theta1_cap_deg",
          "must be > 0");
  require(std::isfinite(s.cell_mm) && s.cell_mm > 0.0, "cell_mm", "must be > 0");
  return out;
}

bool in_workspace(double l1, double l2, const LimitBox& limits, const Vec2& p) {
  const JointLimits lim = limits.radians();
  for (Elbow e : {Elbow::Up, Elbow::Down}) {
    const auto sol = solve_ik(l1, l2, PlanarPose::from(p), e);
    if (sol && lim.contains(*sol)) return true;
  }
  return false;
}

bool ReachableRegion::occupies(const Vec2& p) const {
  return std::binary_search(cells.begin(), cells.end(), cell_of(p, cell_mm));
}

std::pair<std::int64_t, std::int64_t> ReachableRegion::cell_of(const Vec2& p, double cell_mm) {
  return {static_cast<std::int64_t>(std::floor(p(0) / cell_mm)),
          static_cast<std::int64_t>(std::floor(p(1) / cell_mm))};
}

std::vector<double> SweepRange::values() const {
  std::vector<double> out;
  if (!(step > 0.0) || max < min) return out;
  const auto n = static_cast<long>(std::floor((max - min) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(min + static_cast<double>(i) * step);
  if (max - out.back() > 1e-9 * std::max(1.0, std::abs(max))) out.push_back(max);
  return out;
}

ReachableRegion reachable_workspace(double l1, double l2, const LimitBox& limits,
                                    double grid_step_deg, double cell_mm) {
  if (!(grid_step_deg > 0.0)) throw InvalidArgument("reachable_workspace: grid_step must be > 0");
  ReachableRegion out;
  out.cell_mm = cell_mm;
  const auto t1 = SweepRange{limits.theta1_min_deg, limits.theta1_max_deg, grid_step_deg}.values();
  const auto t2 = SweepRange{limits.theta2_min_deg, limits.theta2_max_deg, grid_step_deg}.values();
  const Vec2 len(l1, l2);
  out.points.reserve(t1.size() * t2.size());
  for (double a : t1)
    for (double b : t2) out.points.push_back(forward_kinematics<double>(len, Vec2(deg2rad(a), deg2rad(b))));
  out.cells.reserve(out.points.size());
  for (const auto& p : out.points) out.cells.push_back(ReachableRegion::cell_of(p, cell_mm));
  std::sort(out.cells.begin(), out.cells.end());
  out.cells.erase(std::unique(out.cells.begin(), out.cells.end()), out.cells.end());
  return out;
}

namespace {

// Angle of a point measured clockwise from +y, the same sense as theta1.
double bearing(double x, double y) { return std::atan2(x, y); }

// Does the arc of radius r over bearings [a, b] (a <= b) meet the rectangle?
bool arc_meets_rect(double r, double a, double b, const Rect& rect) {
  if (rect.empty()) return false;
  auto on_arc = [&](double x, double y) {
    const double t = bearing(x, y);
    return t >= a - 1e-12 && t <= b + 1e-12;
  };
  if (rect.contains(r * std::sin(a), r * std::cos(a)) || rect.contains(r * std::sin(b), r * std::cos(b)))
    return true;
  // Crossings of the circle with each edge, kept if on the arc and the edge.
  for (double x : {rect.x_min, rect.x_max}) {
    const double d = r * r - x * x;
    if (d < 0.0) continue;
    for (double y : {std::sqrt(d), -std::sqrt(d)})
      if (y >= rect.y_min && y <= rect.y_max && on_arc(x, y)) return true;
  }
  for (double y : {rect.y_min, rect.y_max}) {
    const double d = r * r - y * y;
    if (d < 0.0) continue;
    for (double x : {std::sqrt(d), -std::sqrt(d)})
      if (x >= rect.x_min && x <= rect.x_max && on_arc(x, y)) return true;
  }
  return false;
}

// Up-branch IK angles of a point, or nullopt outside the annulus.
std::optional<Vec2> up_branch(double l1, double l2, const Vec2& p) {
  return solve_ik(l1, l2, PlanarPose::from(p), Elbow::Up);
}

constexpr double kAngleTol = 1e-9;  // same slack as JointLimits::contains

// Smallest theta2_max (rad) under which every point is reachable with theta1
// in [t1_min, t1_max]; +inf when no theta2_max suffices.
double theta2_needed(double l1, double l2, double t1_min, double t1_max,
                     const std::vector<Vec2>& pts, double give_up_above) {
  double need = 0.0;
  for (const auto& p : pts) {
    const auto s = up_branch(l1, l2, p);
    if (!s || (*s)(0) < t1_min - kAngleTol || (*s)(0) > t1_max + kAngleTol)
      return std::numeric_limits<double>::infinity();
    need = std::max(need, (*s)(1));
    if (need > give_up_above) return std::numeric_limits<double>::infinity();
  }
  return need;
}

// Smallest theta2 (rad) at which some point becomes reachable with theta1 in
// [t1_min, t1_max]; +inf when none ever does.
double theta2_first_hit(double l1, double l2, double t1_min, double t1_max,
                        const std::vector<Vec2>& pts) {
  double hit = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    const auto s = up_branch(l1, l2, p);
    if (s && (*s)(0) >= t1_min - kAngleTol && (*s)(0) <= t1_max + kAngleTol)
      hit = std::min(hit, (*s)(1));
  }
  return hit;
}

}  // namespace

bool link1_clear(double l1, const LimitBox& limits, const WorkspaceSpec& spec) {
  if (limits.theta1_max_deg > spec.theta1_cap_deg + 1e-9) return false;
  return !arc_meets_rect(l1, deg2rad(limits.theta1_min_deg), deg2rad(limits.theta1_max_deg),
                         spec.human_region);
}

bool covers_cooperative(double l1, double l2, const LimitBox& limits, const WorkspaceSpec& spec) {
  for (const auto& c : spec.cooperative_region.cell_centers(spec.cell_mm))
    if (!in_workspace(l1, l2, limits, c)) return false;
  return true;
}

bool clear_of_human(double l1, double l2, const LimitBox& limits, const WorkspaceSpec& spec) {
  for (const auto& c : spec.human_region.cell_centers(spec.cell_mm))
    if (in_workspace(l1, l2, limits, c)) return false;
  return true;
}

ConstraintCheck check_constraints(double l1, double l2, const LimitBox& limits,
                                  const WorkspaceSpec& spec) {
  return {link1_clear(l1, limits, spec), covers_cooperative(l1, l2, limits, spec),
          clear_of_human(l1, l2, limits, spec)};
}

WorkspaceResult optimize_workspace(const WorkspaceSpec& spec, const OptimizationGrid& grid,
                                   double area_step_deg) {
  const auto l1s = grid.l1.values();
  const auto l2s = grid.l2.values();
  const auto t1s = grid.theta1_max.values();
  auto t2s = grid.theta2_max.values();
  if (l1s.empty() || l2s.empty() || t1s.empty() || t2s.empty())
    throw InvalidArgument("optimize_workspace: empty grid");
  std::sort(t2s.begin(), t2s.end());

  const auto coop = spec.cooperative_region.cell_centers(spec.cell_mm);
  const auto human = spec.human_region.cell_centers(spec.cell_mm);

  struct Key {
    double sum, l1, t2, t1;
    bool operator<(const Key& o) const {
      return std::tie(sum, l1, t2, t1) < std::tie(o.sum, o.l1, o.t2, o.t1);
    }
  };
  std::optional<Key> best;
  std::size_t evaluated = 0;

  // With theta2_min = 0 only the up branch can be in limits, so a point joins
  // the workspace exactly when theta2_max reaches its IK theta2. Coverage then
  // needs theta2_max >= max over A_C and clearance needs theta2_max below the
  // min over A_H, which fixes the best theta2_max of each (l1, l2, theta1_max)
  // in one pass over each region.
  const double t1_min = 0.0;
  const double t2_top = deg2rad(t2s.back()) + kAngleTol;
  for (double l1 : l1s) {
    for (double t1 : t1s) {
      if (!link1_clear(l1, LimitBox{t1, 0.0}, spec)) continue;
      for (double l2 : l2s) {
        if (best && l1 + l2 > best->sum) break;
        ++evaluated;
        const double t1r = deg2rad(t1);
        const double need = theta2_needed(l1, l2, t1_min, t1r, coop, t2_top);
        if (!std::isfinite(need)) continue;
        const double hit = theta2_first_hit(l1, l2, t1_min, t1r, human);
        for (double t2 : t2s) {
          const double t2r = deg2rad(t2);
          if (t2r + kAngleTol < need) continue;
          if (t2r + kAngleTol >= hit) break;
          const Key key{l1 + l2, l1, t2, t1};
          if (!best || key < *best) best = key;
          break;
        }
      }
    }
  }
  if (!best) throw InfeasibleError("optimize_workspace: no feasible candidate on the grid");

  WorkspaceResult r;
  r.l1 = best->l1;
  r.l2 = best->sum - best->l1;
  r.theta1_max_deg = best->t1;
  r.theta2_max_deg = best->t2;
  const LimitBox box{r.theta1_max_deg, r.theta2_max_deg};
  r.feasible = check_constraints(r.l1, r.l2, box, spec);
  r.area_mm2 = reachable_workspace(r.l1, r.l2, box, area_step_deg, spec.cell_mm).area_mm2();
  r.candidates_evaluated = evaluated;
  return r;
}

std::vector<OccupancyRow> occupancy_rows(const ReachableRegion& region, const WorkspaceSpec& spec) {
  std::vector<OccupancyRow> rows;
  std::set<std::pair<std::int64_t, std::int64_t>> emitted;
  const double h = spec.cell_mm;
  auto emit_region = [&](const Rect& r, const char* label) {
    for (const auto& c : r.cell_centers(h)) {
      const auto key = ReachableRegion::cell_of(c, h);
      if (emitted.insert(key).second) rows.push_back({c(0), c(1), label});
    }
  };
  emit_region(spec.human_region, "human");
  emit_region(spec.cooperative_region, "cooperative");
  emit_region(spec.main_region, "main");
  for (const auto& cell : region.cells) {
    if (!emitted.insert(cell).second) continue;
    rows.push_back({(static_cast<double>(cell.first) + 0.5) * region.cell_mm,
                    (static_cast<double>(cell.second) + 0.5) * region.cell_mm, "extensive"});
  }
  return rows;
}

}  // namespace vsasrl
