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

#include "vsasrl/kinematics.hpp"

#include <algorithm>
#include <sstream>

namespace vsasrl {

std::optional<Vec2> solve_ik(double l1, double l2, const PlanarPose& p, Elbow elbow) {
  const double r2 = p.x * p.x + p.y * p.y;
  const double r = std::sqrt(r2);
  const double tol = 1e-9 * (l1 + l2);
  if (!std::isfinite(r) || r > l1 + l2 + tol || r < std::abs(l1 - l2) - tol) return std::nullopt;

  const double c2 = std::clamp((r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
  double theta2 = std::acos(c2);
  if (elbow == Elbow::Down) theta2 = -theta2;
  // Direction of the target measured clockwise from +y, plus the angle link 1
  // leads the target direction by.
  const double bearing = std::atan2(p.x, p.y);
  const double lead = std::atan2(l2 * std::sin(theta2), l1 + l2 * std::cos(theta2));
  return Vec2(bearing + lead, theta2);
}

Vec2 inverse_kinematics(double l1, double l2, const PlanarPose& p, Elbow elbow,
                        const JointLimits& limits) {
  const auto sol = solve_ik(l1, l2, p, elbow);
  if (!sol) {
    std::ostringstream os;
    os << "target (" << p.x << ", " << p.y << ") is outside the reachable annulus";
    throw UnreachableTarget(os.str());
  }
  if (!limits.contains(*sol)) {
    std::ostringstream os;
    os << "IK solution (" << rad2deg((*sol)(0)) << ", " << rad2deg((*sol)(1))
       << ") deg violates the joint limits";
    throw JointLimitError(os.str());
  }
  return *sol;
}

}  // namespace vsasrl
