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

// Planar 2R chain. Base frame: +y points away from the user, +x to the user's
// right. theta1 is the angle of link 1 from +y, positive clockwise (toward
// +x); theta2 is the angle of link 2 relative to link 1, positive
// counter-clockwise. Lengths may be in any unit; poses come back in that unit.

#ifndef VSASRL_KINEMATICS_HPP
#define VSASRL_KINEMATICS_HPP

#include <optional>

#include "vsasrl/common.hpp"

namespace vsasrl {

/// End-effector position in the base frame, mm.
struct PlanarPose {
  double x = 0.0;
  double y = 0.0;

  Vec2 vec() const { return {x, y}; }
  static PlanarPose from(const Vec2& v) { return {v(0), v(1)}; }
  bool operator==(const PlanarPose&) const = default;
};

template <typename Scalar>
Vector2<Scalar> forward_kinematics(const Vector2<Scalar>& length, const Vector2<Scalar>& theta) {
  using std::cos;
  using std::sin;
  const Scalar a2 = theta(0) - theta(1);
  return {length(0) * sin(theta(0)) + length(1) * sin(a2),
          length(0) * cos(theta(0)) + length(1) * cos(a2)};
}

inline PlanarPose forward_kinematics(double l1, double l2, const Vec2& theta) {
  return PlanarPose::from(forward_kinematics<double>(Vec2(l1, l2), theta));
}

/// d(x, y)/d(theta1, theta2).
template <typename Scalar>
Matrix2<Scalar> jacobian(const Vector2<Scalar>& length, const Vector2<Scalar>& theta) {
  using std::cos;
  using std::sin;
  const Scalar a2 = theta(0) - theta(1);
  const Scalar c2 = length(1) * cos(a2);
  const Scalar s2 = length(1) * sin(a2);
  Matrix2<Scalar> j;
  j << length(0) * cos(theta(0)) + c2, -c2,
      -length(0) * sin(theta(0)) - s2, s2;
  return j;
}

inline Mat2 jacobian(double l1, double l2, const Vec2& theta) {
  return jacobian<double>(Vec2(l1, l2), theta);
}

/// Elbow branch. `Up` bends link 2 counter-clockwise (theta2 >= 0), which in
/// the shipped layout keeps the elbow on the far side from the user.
enum class Elbow { Up, Down };

struct JointLimits {
  Vec2 min{0.0, 0.0};
  Vec2 max{deg2rad(65.0), deg2rad(125.0)};

  bool contains(const Vec2& theta, double tol = 1e-9) const {
    return (theta.array() >= min.array() - tol).all() && (theta.array() <= max.array() + tol).all();
  }
};

/// Closed-form IK without limit checks; nullopt when outside the annulus.
std::optional<Vec2> solve_ik(double l1, double l2, const PlanarPose& p, Elbow elbow);

/// Closed-form IK. Throws UnreachableTarget outside |l1 - l2| <= |p| <= l1 + l2
/// and JointLimitError when the selected branch violates `limits`.
Vec2 inverse_kinematics(double l1, double l2, const PlanarPose& p, Elbow elbow,
                        const JointLimits& limits = {});

}  // namespace vsasrl

#endif  // VSASRL_KINEMATICS_HPP
