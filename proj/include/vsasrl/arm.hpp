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

#ifndef VSASRL_ARM_HPP
#define VSASRL_ARM_HPP

#include <string>
#include <vector>

#include "vsasrl/common.hpp"

namespace vsasrl {

/// Physical constants of the two-link elastic-joint arm. SI units throughout;
/// every per-joint quantity is a 2-vector indexed by joint.
///
/// Link geometry follows the planar 2R chain of kinematics.hpp: theta1 is
/// measured clockwise from the base +y axis, theta2 counter-clockwise relative
/// to link 1. The operating plane is tilted by `alpha` about the base x axis,
/// so gravity acts in-plane along -y with magnitude g0 * sin(alpha).
struct ArmParams {
  Vec2 length{0.674, 0.545};         // m
  Vec2 mass{2.0, 0.8};               // kg
  Vec2 com{0.25, 0.30};              // m, COM distance from the proximal joint
  Vec2 inertia{0.08, 0.025};         // kg m^2, about the COM
  Vec2 motor_inertia{2.5, 2.5};      // kg m^2, reflected through the gearbox
  Vec2 link_damping{0.2, 0.2};       // N m s/rad
  Vec2 motor_damping{1.0, 1.0};      // N m s/rad
  double alpha = 0.0;                // rad
  double g0 = 9.81;                  // m/s^2
  Vec2 theta_min{0.0, 0.0};                          // rad
  Vec2 theta_max{deg2rad(65.0), deg2rad(125.0)};     // rad
  double tau_max = 35.0;             // N m
  double omega_max = deg2rad(120.0); // rad/s
  double k_min = 70.0;               // N m/rad
  double k_max = 8000.0;             // N m/rad
  double t_stiff = 0.450;            // s, full-range stiffness variation
  double limit_stiffness = 5000.0;   // N m/rad, mechanical end stop
  double limit_damping = 50.0;       // N m s/rad

  /// Stiffness ramp rate of the actuator, N m/(rad s).
  double stiffness_rate() const { return (k_max - k_min) / t_stiff; }
};

/// Field paths of every violated invariant, each prefixed by `prefix`.
std::vector<std::string> violations(const ArmParams& p, const std::string& prefix = "arm");

/// Throws ValidationError if any invariant is violated.
void validate(const ArmParams& p);

struct ArmState {
  Vec2 theta = Vec2::Zero();
  Vec2 theta_dot = Vec2::Zero();
  Vec2 phi = Vec2::Zero();
  Vec2 phi_dot = Vec2::Zero();
  Vec2 k = Vec2::Zero();
  Vec2 k_target = Vec2::Zero();
  double t = 0.0;

  bool finite() const;
};

/// A state at rest at `theta` with both joints at stiffness `k`.
ArmState rest_state(const Vec2& theta, double k);

/// Returns `p` with link masses and COM inertias scaled per joint.
ArmParams with_mass_scale(const ArmParams& p, const Vec2& scale);

}  // namespace vsasrl

#endif  // VSASRL_ARM_HPP
