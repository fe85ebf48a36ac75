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

// Workspace regions and the brute-force link-length / joint-limit sweep.
// Lengths in mm, angles in degrees at this interface unless noted.

#ifndef VSASRL_WORKSPACE_HPP
#define VSASRL_WORKSPACE_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vsasrl/common.hpp"
#include "vsasrl/kinematics.hpp"

namespace vsasrl {

/// Axis-aligned rectangle in the base frame, mm. Empty when either extent is
/// not positive.
struct Rect {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  bool empty() const { return !(x_max > x_min && y_max > y_min); }
  bool contains(double x, double y) const {
    return !empty() && x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
  bool contains(const Rect& r) const {
    return r.empty() || (!empty() && r.x_min >= x_min && r.x_max <= x_max && r.y_min >= y_min &&
                         r.y_max <= y_max);
  }
  double area() const { return empty() ? 0.0 : (x_max - x_min) * (y_max - y_min); }

  /// Centres of the `cell`-sized raster cells covering the rectangle.
  std::vector<Vec2> cell_centers(double cell) const;
};

/// Anthropometric dimensions and the three task regions.
struct WorkspaceSpec {
  double A = 327.0;  // minimum horizontal reach
  double B = 240.0;  // harness/actuator offset
  double C = 150.0;  // reach range
  double D = 589.0;  // workspace breadth
  double E = 280.0;  // chest depth
  Rect main_region;         // A_M
  Rect cooperative_region;  // A_C
  Rect human_region;        // A_H
  double theta1_cap_deg = 65.0;  // constraint (1) angular bound
  double cell_mm = 5.0;          // raster resolution

  /// Shipped layout: A_M is a D-wide band at radial depth [A+B, A+B+C]
  /// starting `main_x_min` mm left of the base axis; A_C is its part left of
  /// x = -midline_gap; A_H is D x E on the base line, offset B to +x.
  static WorkspaceSpec defaults(double main_x_min = -537.0, double midline_gap = 75.0);

  /// Recomputes the three regions from A..E with the layout above.
  void layout(double main_x_min, double midline_gap);
};

std::vector<std::string> violations(const WorkspaceSpec& s, const std::string& prefix = "workspace");

/// Joint-limit box in degrees (lower bounds are the zero stops).
struct LimitBox {
  double theta1_max_deg = 65.0;
  double theta2_max_deg = 125.0;
  double theta1_min_deg = 0.0;
  double theta2_min_deg = 0.0;

  JointLimits radians() const {
    return {Vec2(deg2rad(theta1_min_deg), deg2rad(theta2_min_deg)),
            Vec2(deg2rad(theta1_max_deg), deg2rad(theta2_max_deg))};
  }
};

/// True when `p` (mm) is an FK image of some in-limit configuration. Exact,
/// via closed-form IK on the counter-clockwise elbow branch (the only branch
/// compatible with non-negative theta2).
bool in_workspace(double l1, double l2, const LimitBox& limits, const Vec2& p);

/// FK images sampled over the joint-limit box and their raster occupancy.
struct ReachableRegion {
  std::vector<Vec2> points;                          // mm
  std::vector<std::pair<std::int64_t, std::int64_t>> cells;  // sorted, unique
  double cell_mm = 5.0;

  double area_mm2() const { return static_cast<double>(cells.size()) * cell_mm * cell_mm; }
  bool occupies(const Vec2& p) const;
  static std::pair<std::int64_t, std::int64_t> cell_of(const Vec2& p, double cell_mm);
};

ReachableRegion reachable_workspace(double l1, double l2, const LimitBox& limits,
                                    double grid_step_deg, double cell_mm = 5.0);

struct ConstraintCheck {
  bool link1_clear = false;  // (1) theta1_max within the cap, elbow sweep outside A_H
  bool coverage = false;     // (2) A_C inside A_W
  bool human_clear = false;  // (3) A_W and A_H disjoint
  bool all() const { return link1_clear && coverage && human_clear; }
};

bool link1_clear(double l1, const LimitBox& limits, const WorkspaceSpec& spec);
bool covers_cooperative(double l1, double l2, const LimitBox& limits, const WorkspaceSpec& spec);
bool clear_of_human(double l1, double l2, const LimitBox& limits, const WorkspaceSpec& spec);

ConstraintCheck check_constraints(double l1, double l2, const LimitBox& limits,
                                  const WorkspaceSpec& spec);

struct SweepRange {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;

  /// min, min + step, ... up to max (inclusive within rounding).
  std::vector<double> values() const;
};

struct OptimizationGrid {
  SweepRange l1{500.0, 800.0, 2.0};
  SweepRange l2{400.0, 700.0, 2.0};
  SweepRange theta1_max{65.0, 65.0, 5.0};
  SweepRange theta2_max{90.0, 140.0, 5.0};
};

struct WorkspaceResult {
  double l1 = 0.0;
  double l2 = 0.0;
  double theta1_max_deg = 0.0;
  double theta2_max_deg = 0.0;
  double area_mm2 = 0.0;
  ConstraintCheck feasible;
  std::size_t candidates_evaluated = 0;
};

/// Exhaustive sweep minimizing l1 + l2 over feasible candidates; ties go to
/// the smaller l1, then the smaller theta2_max, then the smaller theta1_max.
/// Throws InfeasibleError when nothing on the grid is feasible.
WorkspaceResult optimize_workspace(const WorkspaceSpec& spec, const OptimizationGrid& grid,
                                   double area_step_deg = 0.2);

/// Occupancy rows (x_mm, y_mm, label) for plotting: every region cell with
/// its region label (human, cooperative, main) and every other reachable
/// cell as "extensive".
struct OccupancyRow {
  double x_mm;
  double y_mm;
  std::string label;
};
std::vector<OccupancyRow> occupancy_rows(const ReachableRegion& region, const WorkspaceSpec& spec);

}  // namespace vsasrl

#endif  // VSASRL_WORKSPACE_HPP
