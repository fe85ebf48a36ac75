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

// Elastic-joint equations of motion of the two-link arm:
//
//   M1(theta) theta_dd + C(theta, theta_d) theta_d + g(theta) + K (theta - phi) + F_rl = tau_ext
//   M2 phi_dd + K (phi - theta) + F_rm = tau_m
//
// with M2 = diag(J), K = diag(k), F_rl = diag(b_l) theta_d, F_rm = diag(b_m) phi_d.

#ifndef VSASRL_DYNAMICS_HPP
#define VSASRL_DYNAMICS_HPP

#include <functional>

#include "vsasrl/arm.hpp"
#include "vsasrl/common.hpp"

namespace vsasrl {

/// Link-side inertia matrix M1(theta).
template <typename Scalar>
Matrix2<Scalar> mass_matrix(const ArmParams& p, const Vector2<Scalar>& theta) {
  using std::cos;
  const Scalar m2 = Scalar(p.mass(1));
  const Scalar l1 = Scalar(p.length(0));
  const Scalar lc1 = Scalar(p.com(0));
  const Scalar lc2 = Scalar(p.com(1));
  const Scalar c2 = cos(theta(1));

  const Scalar m22 = Scalar(p.inertia(1)) + m2 * lc2 * lc2;
  // theta2 turns opposite to theta1, hence the negative coupling term.
  const Scalar m12 = -(m22 + m2 * l1 * lc2 * c2);
  const Scalar m11 = Scalar(p.inertia(0)) + Scalar(p.mass(0)) * lc1 * lc1 + m22 +
                     m2 * (l1 * l1 + Scalar(2) * l1 * lc2 * c2);
  Matrix2<Scalar> m;
  m << m11, m12, m12, m22;
  return m;
}

/// Christoffel-symbol matrix C such that the Coriolis/centrifugal torque is
/// C * theta_dot and dM1/dt - 2C is skew-symmetric.
template <typename Scalar>
Matrix2<Scalar> coriolis_matrix(const ArmParams& p, const Vector2<Scalar>& theta,
                                const Vector2<Scalar>& theta_dot) {
  using std::sin;
  const Scalar h = Scalar(p.mass(1)) * Scalar(p.length(0)) * Scalar(p.com(1)) * sin(theta(1));
  Matrix2<Scalar> c;
  c << -h * theta_dot(1), h * (theta_dot(1) - theta_dot(0)),
       h * theta_dot(0), Scalar(0);
  return c;
}

/// Gravity torque of the tilted operating plane (zero for alpha = 0).
template <typename Scalar>
Vector2<Scalar> gravity_torque(const ArmParams& p, const Vector2<Scalar>& theta) {
  using std::sin;
  const Scalar g = Scalar(p.g0 * std::sin(p.alpha));
  const Scalar s1 = sin(theta(0));
  const Scalar s12 = sin(theta(0) - theta(1));
  const Scalar a = Scalar(p.mass(1) * p.com(1));
  return Vector2<Scalar>(
      -g * (Scalar(p.mass(0) * p.com(0) + p.mass(1) * p.length(0)) * s1 + a * s12),
      g * a * s12);
}

/// Motor-side inertia matrix M2 = diag(J).
inline Mat2 motor_mass_matrix(const ArmParams& p) { return p.motor_inertia.asDiagonal(); }

/// End-stop torque of the simulated mechanical limiters; `hit` reports contact.
Vec2 joint_limit_torque(const ArmParams& p, const Vec2& theta, const Vec2& theta_dot,
                        bool* hit = nullptr);

struct Accelerations {
  Vec2 theta_ddot = Vec2::Zero();
  Vec2 phi_ddot = Vec2::Zero();
  Vec2 tau_applied = Vec2::Zero();  // motor torque after saturation
  bool saturated = false;
  bool limit_hit = false;
};

/// Solves both equations of motion. The motor torque is saturated to
/// +-tau_max here and the applied value is reported. Throws NonFiniteError.
Accelerations forward_dynamics(const ArmParams& p, const ArmState& s, const Vec2& tau_m,
                               const Vec2& tau_ext);

/// External torque evaluated at each integrator stage.
using ExternalTorque = std::function<Vec2(const ArmState&)>;

struct StepOutcome {
  ArmState state;
  Vec2 tau_applied = Vec2::Zero();
  bool saturated = false;
  bool limit_hit = false;
};

/// One classical RK4 step with stiffness frozen over the step, followed by
/// update_stiffness. tau_m is held over the step.
StepOutcome integrate(const ArmParams& p, const ArmState& s, const Vec2& tau_m,
                      const ExternalTorque& tau_ext, double dt = 1e-3);

ArmState step(const ArmParams& p, const ArmState& s, const Vec2& tau_m, const Vec2& tau_ext,
              double dt = 1e-3);

/// Moves k toward k_target on a linear ramp at the actuator's full-range rate.
ArmState update_stiffness(const ArmParams& p, const ArmState& s, double dt);

/// Kinetic + elastic + gravitational (+ end-stop) energy, J.
double total_energy(const ArmParams& p, const ArmState& s);

}  // namespace vsasrl

#endif  // VSASRL_DYNAMICS_HPP
