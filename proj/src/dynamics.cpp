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

#include "vsasrl/dynamics.hpp"

#include <algorithm>

namespace vsasrl {

Vec2 joint_limit_torque(const ArmParams& p, const Vec2& theta, const Vec2& theta_dot, bool* hit) {
  Vec2 tau = Vec2::Zero();
  bool any = false;
  for (int i = 0; i < 2; ++i) {
    if (theta(i) < p.theta_min(i)) {
      const double t = p.limit_stiffness * (p.theta_min(i) - theta(i)) -
                       p.limit_damping * std::min(theta_dot(i), 0.0);
      tau(i) = std::max(t, 0.0);
      any = true;
    } else if (theta(i) > p.theta_max(i)) {
      const double t = -p.limit_stiffness * (theta(i) - p.theta_max(i)) -
                       p.limit_damping * std::max(theta_dot(i), 0.0);
      tau(i) = std::min(t, 0.0);
      any = true;
    }
  }
  if (hit) *hit = any;
  return tau;
}

Accelerations forward_dynamics(const ArmParams& p, const ArmState& s, const Vec2& tau_m,
                               const Vec2& tau_ext) {
  if (!s.finite() || !tau_m.allFinite() || !tau_ext.allFinite())
    throw NonFiniteError("forward_dynamics: non-finite input");

  Accelerations out;
  out.tau_applied = tau_m.cwiseMax(-p.tau_max).cwiseMin(p.tau_max);
  out.saturated = (out.tau_applied - tau_m).cwiseAbs().maxCoeff() > 0.0;

  const Vec2 spring = s.k.cwiseProduct(s.theta - s.phi);
  const Vec2 tau_limit = joint_limit_torque(p, s.theta, s.theta_dot, &out.limit_hit);
  const Vec2 link_rhs = tau_ext + tau_limit -
                        coriolis_matrix(p, s.theta, s.theta_dot) * s.theta_dot -
                        gravity_torque(p, s.theta) - spring -
                        p.link_damping.cwiseProduct(s.theta_dot);
  out.theta_ddot = mass_matrix(p, s.theta).llt().solve(link_rhs);
  out.phi_ddot = (out.tau_applied + spring - p.motor_damping.cwiseProduct(s.phi_dot))
                     .cwiseQuotient(p.motor_inertia);
  return out;
}

namespace {

struct Derivative {
  Vec2 theta, theta_dot, phi, phi_dot;
};

ArmState advance(const ArmState& s, const Derivative& d, double h) {
  ArmState out = s;
  out.theta += h * d.theta;
  out.theta_dot += h * d.theta_dot;
  out.phi += h * d.phi;
  out.phi_dot += h * d.phi_dot;
  return out;
}

}  // namespace

StepOutcome integrate(const ArmParams& p, const ArmState& s, const Vec2& tau_m,
                      const ExternalTorque& tau_ext, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("step: dt must be > 0");
  if (!s.finite()) throw NonFiniteError("step: non-finite state");

  StepOutcome out;
  auto eval = [&](const ArmState& x, bool first) {
    const Vec2 ext = tau_ext ? tau_ext(x) : Vec2::Zero();
    const Accelerations a = forward_dynamics(p, x, tau_m, ext);
    if (first) {
      out.tau_applied = a.tau_applied;
      out.saturated = a.saturated;
    }
    out.limit_hit = out.limit_hit || a.limit_hit;
    return Derivative{x.theta_dot, a.theta_ddot, x.phi_dot, a.phi_ddot};
  };

  const Derivative k1 = eval(s, true);
  const Derivative k2 = eval(advance(s, k1, 0.5 * dt), false);
  const Derivative k3 = eval(advance(s, k2, 0.5 * dt), false);
  const Derivative k4 = eval(advance(s, k3, dt), false);

  ArmState next = s;
  next.theta += dt / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta);
  next.theta_dot +=
      dt / 6.0 * (k1.theta_dot + 2.0 * k2.theta_dot + 2.0 * k3.theta_dot + k4.theta_dot);
  next.phi += dt / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
  next.phi_dot += dt / 6.0 * (k1.phi_dot + 2.0 * k2.phi_dot + 2.0 * k3.phi_dot + k4.phi_dot);
  next.t = s.t + dt;
  next = update_stiffness(p, next, dt);
  if (!next.finite()) throw NonFiniteError("step: integration diverged");
  out.state = next;
  return out;
}

ArmState step(const ArmParams& p, const ArmState& s, const Vec2& tau_m, const Vec2& tau_ext,
              double dt) {
  return integrate(p, s, tau_m, [&](const ArmState&) { return tau_ext; }, dt).state;
}

ArmState update_stiffness(const ArmParams& p, const ArmState& s, double dt) {
  ArmState out = s;
  const double max_delta = p.stiffness_rate() * dt;
  for (int i = 0; i < 2; ++i) {
    const double target = std::clamp(s.k_target(i), p.k_min, p.k_max);
    const double delta = std::clamp(target - s.k(i), -max_delta, max_delta);
    out.k(i) = std::clamp(s.k(i) + delta, p.k_min, p.k_max);
    // Snap once within rounding of the target so the ramp terminates exactly.
    if (std::abs(target - out.k(i)) <= 1e-9 * p.k_max) out.k(i) = target;
  }
  return out;
}

double total_energy(const ArmParams& p, const ArmState& s) {
  const double kinetic = 0.5 * s.theta_dot.dot(mass_matrix(p, s.theta) * s.theta_dot) +
                         0.5 * s.phi_dot.dot(p.motor_inertia.cwiseProduct(s.phi_dot));
  const Vec2 defl = s.theta - s.phi;
  const double elastic = 0.5 * defl.dot(s.k.cwiseProduct(defl));

  // In-plane gravity along -y; potential relative to the base height.
  const double g = p.g0 * std::sin(p.alpha);
  const double y1 = p.com(0) * std::cos(s.theta(0));
  const double y2 = p.length(0) * std::cos(s.theta(0)) + p.com(1) * std::cos(s.theta(0) - s.theta(1));
  const double gravity = g * (p.mass(0) * y1 + p.mass(1) * y2);

  double end_stop = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double pen = std::max(p.theta_min(i) - s.theta(i), 0.0) +
                       std::max(s.theta(i) - p.theta_max(i), 0.0);
    end_stop += 0.5 * p.limit_stiffness * pen * pen;
  }
  return kinetic + elastic + gravity + end_stop;
}

}  // namespace vsasrl
