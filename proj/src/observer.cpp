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

#include "vsasrl/observer.hpp"

#include <algorithm>
#include <cmath>

namespace vsasrl {

std::vector<std::string> violations(const ObserverConfig& c, const std::string& prefix) {
  std::vector<std::string> out;
  if (!(c.gain.allFinite() && (c.gain.array() > 0.0).all()))
    out.push_back(prefix + ".gain: entries must be finite and > 0");
  if (!(std::isfinite(c.epsilon_c) && c.epsilon_c >= 0.0))
    out.push_back(prefix + ".epsilon_c: must be finite and >= 0");
  if (!(std::isfinite(c.dt) && c.dt > 0.0)) out.push_back(prefix + ".dt: must be > 0");
  return out;
}

namespace {

// Integral of beta over one step along the cubic Hermite interpolant of the
// joint trajectory, 3-point Gauss-Legendre in normalized time.
Vec2 hermite_beta_integral(const ArmParams& m, const Vec2& th0, const Vec2& thd0, const Vec2& th1,
                           const Vec2& thd1, double dt) {
  static const double a = 0.5 * std::sqrt(0.6);
  static const double nodes[3] = {0.5 - a, 0.5, 0.5 + a};
  static const double weights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  Vec2 acc = Vec2::Zero();
  for (int i = 0; i < 3; ++i) {
    const double s = nodes[i], s2 = s * s, s3 = s2 * s;
    const Vec2 th = (2 * s3 - 3 * s2 + 1) * th0 + (s3 - 2 * s2 + s) * dt * thd0 +
                    (-2 * s3 + 3 * s2) * th1 + (s3 - s2) * dt * thd1;
    const Vec2 thd = (6 * s2 - 6 * s) / dt * (th0 - th1) + (3 * s2 - 4 * s + 1) * thd0 +
                     (3 * s2 - 2 * s) * thd1;
    acc += weights[i] * beta<double>(m, th, thd);
  }
  return dt * acc;
}

}  // namespace

ObserverState observer_init(const ObserverConfig& cfg, const ArmParams& model, const ArmState& s0) {
  if (!s0.finite()) throw NonFiniteError("observer_init: non-finite state");
  (void)cfg;
  ObserverState o;
  o.p0 = momentum(model, s0);
  o.t = s0.t;
  o.last_beta = beta<double>(model, s0.theta, s0.theta_dot);
  o.last_theta = s0.theta;
  o.last_theta_dot = s0.theta_dot;
  o.last_phi = s0.phi;
  return o;
}

ObserverState observer_step(const ObserverConfig& cfg, const ObserverState& obs,
                            const ArmParams& model, const ArmState& s, const Vec2& tau_applied) {
  if (!s.finite() || !tau_applied.allFinite())
    throw NonFiniteError("observer_step: non-finite input");
  const double dt = cfg.dt;
  ObserverState o = obs;
  const Vec2 b = beta<double>(model, s.theta, s.theta_dot);
  // The held torque and the viscous friction (from encoder differences)
  // integrate exactly. r uses the trapezoidal rule, solved implicitly for the
  // new sample.
  const Vec2 friction = model.link_damping.cwiseProduct(s.theta - obs.last_theta) +
                        model.motor_damping.cwiseProduct(s.phi - obs.last_phi);
  const Vec2 beta_int =
      cfg.quadrature == BetaQuadrature::Hermite
          ? hermite_beta_integral(model, obs.last_theta, obs.last_theta_dot, s.theta, s.theta_dot, dt)
          : Vec2(0.5 * dt * (obs.last_beta + b));
  const Vec2 partial =
      obs.integral_acc + dt * tau_applied - friction - beta_int + 0.5 * dt * obs.r;
  const Vec2 p = momentum(model, s);
  const Vec2 denom = (Vec2::Ones() + 0.5 * dt * cfg.gain);
  o.r = cfg.gain.cwiseProduct(p - o.p0 - partial).cwiseQuotient(denom);
  o.integral_acc = partial + 0.5 * dt * o.r;
  o.last_beta = b;
  o.last_theta = s.theta;
  o.last_theta_dot = s.theta_dot;
  o.last_phi = s.phi;
  o.t = s.t;
  if (!o.r.allFinite()) throw NonFiniteError("observer_step: residual diverged");
  return o;
}

Threshold calibrate_threshold(const ObserverConfig& cfg,
                              const std::vector<std::vector<Vec2>>& collision_free_runs) {
  Threshold th;
  bool any = false;
  for (const auto& run : collision_free_runs) {
    for (const auto& r : run) {
      if (!r.allFinite()) throw NonFiniteError("calibrate_threshold: non-finite residual");
      th.r_hat_max = th.r_hat_max.cwiseMax(r.cwiseAbs());
      any = true;
    }
  }
  if (!any) throw InvalidArgument("calibrate_threshold: no residual samples");
  th.epsilon_r = th.r_hat_max + Vec2::Constant(cfg.epsilon_c);
  return th;
}

ObserverState with_threshold(ObserverState obs, const Threshold& th) {
  obs.r_hat_max = th.r_hat_max;
  obs.epsilon_r = th.epsilon_r;
  obs.calibrated = true;
  return obs;
}

std::optional<DetectionEvent> detect(ObserverState& obs) {
  if (!obs.calibrated) throw InvalidArgument("detect: observer threshold is not calibrated");
  if (obs.event) return obs.event;
  for (int j = 0; j < 2; ++j) {
    if (std::abs(obs.r(j)) >= obs.epsilon_r(j)) {
      obs.event = DetectionEvent{obs.t, j, obs.r(j)};
      return obs.event;
    }
  }
  return std::nullopt;
}

void reset_detection(ObserverState& obs) { obs.event.reset(); }

}  // namespace vsasrl
