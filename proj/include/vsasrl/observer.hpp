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

// Generalized-momentum collision observer:
//
//   r = K_O [ p - p0 - integral(tau_m - F_rl - F_rm - beta + r) dt ]
//   p = M1(theta) theta_dot + M2 phi_dot,  beta = g(theta) - C^T theta_dot
//
// The elastic torques cancel in the combined momentum, so with an exact model
// r tracks the external link torque through a first-order lag of bandwidth K_O.

#ifndef VSASRL_OBSERVER_HPP
#define VSASRL_OBSERVER_HPP

#include <optional>
#include <string>
#include <vector>

#include "vsasrl/arm.hpp"
#include "vsasrl/common.hpp"
#include "vsasrl/dynamics.hpp"

namespace vsasrl {

/// Quadrature of beta over a step. `Hermite` integrates along the cubic
/// Hermite interpolant of the measured (theta, theta_dot) samples with 3-point
/// Gauss-Legendre; `Trapezoid` uses the two end samples only.
enum class BetaQuadrature { Hermite, Trapezoid };

struct ObserverConfig {
  Vec2 gain{50.0, 50.0};   // K_O, 1/s
  double epsilon_c = 1.0;  // threshold margin, N m
  double dt = 1e-3;        // s
  BetaQuadrature quadrature = BetaQuadrature::Hermite;
};

std::vector<std::string> violations(const ObserverConfig& c, const std::string& prefix = "observer");

struct DetectionEvent {
  double time = 0.0;
  int joint = 0;
  double residual_value = 0.0;
};

struct ObserverState {
  Vec2 r = Vec2::Zero();             // N m
  Vec2 integral_acc = Vec2::Zero();  // N m s
  Vec2 p0 = Vec2::Zero();            // N m s
  Vec2 epsilon_r = Vec2::Zero();     // N m
  Vec2 r_hat_max = Vec2::Zero();     // N m
  bool calibrated = false;
  double t = 0.0;
  std::optional<DetectionEvent> event;  // latched

  // Previous sample, for the quadrature.
  Vec2 last_beta = Vec2::Zero();
  Vec2 last_theta = Vec2::Zero();
  Vec2 last_theta_dot = Vec2::Zero();
  Vec2 last_phi = Vec2::Zero();
};

template <typename Scalar>
Vector2<Scalar> momentum(const ArmParams& p, const Vector2<Scalar>& theta,
                         const Vector2<Scalar>& theta_dot, const Vector2<Scalar>& phi_dot) {
  return mass_matrix<Scalar>(p, theta) * theta_dot +
         p.motor_inertia.cast<Scalar>().cwiseProduct(phi_dot);
}

inline Vec2 momentum(const ArmParams& p, const ArmState& s) {
  return momentum<double>(p, s.theta, s.theta_dot, s.phi_dot);
}

template <typename Scalar>
Vector2<Scalar> beta(const ArmParams& p, const Vector2<Scalar>& theta,
                     const Vector2<Scalar>& theta_dot) {
  return gravity_torque<Scalar>(p, theta) -
         coriolis_matrix<Scalar>(p, theta, theta_dot).transpose() * theta_dot;
}

/// Observer primed at `s0` (p0 = p(s0), r = 0). `model` is the observer's
/// copy of the plant parameters, which may differ from the simulated plant.
ObserverState observer_init(const ObserverConfig& cfg, const ArmParams& model, const ArmState& s0);

/// Advances the observer by cfg.dt to the measured state `s`. `tau_applied`
/// is the motor torque held over the elapsed step. Throws NonFiniteError.
ObserverState observer_step(const ObserverConfig& cfg, const ObserverState& obs,
                            const ArmParams& model, const ArmState& s, const Vec2& tau_applied);

struct Threshold {
  Vec2 r_hat_max = Vec2::Zero();
  Vec2 epsilon_r = Vec2::Zero();
};

/// r_hat_max = per-joint max |r| over all traces; epsilon_r = r_hat_max +
/// epsilon_c. Throws InvalidArgument when there is no sample.
Threshold calibrate_threshold(const ObserverConfig& cfg,
                              const std::vector<std::vector<Vec2>>& collision_free_runs);

ObserverState with_threshold(ObserverState obs, const Threshold& th);

/// Latches and returns the first threshold crossing (lowest joint index on a
/// tie); returns the latched event on later calls. Throws InvalidArgument on
/// an uncalibrated observer.
std::optional<DetectionEvent> detect(ObserverState& obs);

void reset_detection(ObserverState& obs);

}  // namespace vsasrl

#endif  // VSASRL_OBSERVER_HPP
