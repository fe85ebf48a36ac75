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

#include "vsasrl/stab.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "vsasrl/dynamics.hpp"

namespace vsasrl {

std::vector<std::string> violations(const ContactMedium& m, const std::string& prefix) {
  std::vector<std::string> out;
  auto positive = [&](double v, const char* name) {
    if (!(std::isfinite(v) && v > 0.0)) out.push_back(prefix + "." + name + ": must be finite and > 0");
  };
  positive(m.k_c, "k_c");
  positive(m.c_c, "c_c");
  positive(m.F_y, "F_y");
  positive(m.c_cut, "c_cut");
  positive(m.depth_limit, "depth_limit");
  return out;
}

double contact_force(const ContactMedium& m, double s, double s_dot, double d) {
  if (!std::isfinite(s) || !std::isfinite(s_dot) || !std::isfinite(d))
    throw NonFiniteError("contact_force: non-finite input");
  if (s <= d) return 0.0;
  return std::max(0.0, m.k_c * (s - d) + m.c_c * s_dot);
}

double advance_cut(const ContactMedium& m, double s, double d, double dt) {
  const double excess = m.k_c * (s - d) - m.F_y;
  if (excess <= 0.0) return d;
  return std::min({d + excess / m.c_cut * dt, s, m.depth_limit});
}

std::vector<std::string> violations(const StabGeometry& g, const std::string& prefix) {
  std::vector<std::string> out;
  if (!(std::isfinite(g.point.x) && std::isfinite(g.point.y))) out.push_back(prefix + ".point: must be finite");
  if (!(std::isfinite(g.approach_distance) && g.approach_distance > 0.0))
    out.push_back(prefix + ".approach_distance: must be > 0");
  if (!(std::isfinite(g.accel) && g.accel > 0.0)) out.push_back(prefix + ".accel: must be > 0");
  if (!(std::isfinite(g.contact_window) && g.contact_window > 0.0))
    out.push_back(prefix + ".contact_window: must be > 0");
  return out;
}

StabCase stab_case(int id, const ArmParams& p) {
  switch (id) {
    case 1: return {1, p.k_min, ReactionStrategy::ZeroTorque};
    case 2: return {2, p.k_max, ReactionStrategy::ZeroTorque};
    case 3: return {3, p.k_max, ReactionStrategy::ZeroTorquePlusSoften};
    default: throw InvalidArgument("stab case must be 1, 2 or 3");
  }
}

namespace {

// Position and speed along the approach line (y decreasing), m and m/s,
// measured from the start point.
struct LineRef {
  double travel = 0.0;
  double speed = 0.0;
};

// Accelerate at `a` to `v` and coast. With `stop_at` > 0 the motion instead
// decelerates at `a` to rest after `stop_at` metres of travel.
LineRef line_ref(double t, double v, double a, double stop_at) {
  const double t_a = v / a;
  const double d_a = 0.5 * a * t_a * t_a;
  if (stop_at <= 0.0) {
    if (t < t_a) return {0.5 * a * t * t, a * t};
    return {d_a + v * (t - t_a), v};
  }
  // Trapezoid (or triangle) ending at rest after stop_at.
  double vp = v, ta = t_a, da = d_a;
  if (2.0 * d_a > stop_at) {
    vp = std::sqrt(a * stop_at);
    ta = vp / a;
    da = 0.5 * stop_at;
  }
  const double tc = (stop_at - 2.0 * da) / vp;
  if (t < ta) return {0.5 * a * t * t, a * t};
  if (t < ta + tc) return {da + vp * (t - ta), vp};
  const double td = t - ta - tc;
  if (td < ta) return {da + vp * tc + vp * td - 0.5 * a * td * td, vp - a * td};
  return {stop_at, 0.0};
}

struct ApproachSetup {
  double l1, l2;            // m
  double x;                 // m, line abscissa
  double y_surface;         // m
  double y_start;           // m
  double y_floor;           // m, the reference never goes below this
  JointLimits limits;
};

ApproachSetup make_setup(const ArmParams& p, const StabGeometry& g, const ContactMedium* m) {
  ApproachSetup s;
  s.l1 = p.length(0);
  s.l2 = p.length(1);
  s.x = g.point.x * 1e-3;
  s.y_surface = g.point.y * 1e-3;
  s.y_start = s.y_surface + g.approach_distance;
  s.y_floor = s.y_surface - (m ? m->depth_limit + 0.01 : 0.0);
  s.limits = JointLimits{p.theta_min, p.theta_max};
  return s;
}

// Joint reference for a point on the line moving at y_dot.
JointSample joint_ref(const ApproachSetup& s, double y, double y_dot) {
  JointSample r;
  r.q = inverse_kinematics(s.l1, s.l2, {s.x, y}, Elbow::Up, s.limits);
  r.qd = jacobian(s.l1, s.l2, r.q).partialPivLu().solve(Vec2(0.0, y_dot));
  return r;
}

// Common loop of the stab run and its collision-free twin.
struct ApproachRun {
  const ArmParams& plant;
  const ArmParams& model;
  const ObserverConfig& obs_cfg;
  const PidGains& gains;
  const ApproachSetup& setup;
  StabCase scase;
  double velocity;
  double accel;
  double stop_at;  // > 0: collision-free run ending at rest

  ArmState state;
  ObserverState obs;
  PidState pid;

  void start() {
    const JointSample r0 = joint_ref(setup, setup.y_start, 0.0);
    state = rest_state(r0.q, scase.stiffness);
    state.phi = motor_setpoint(plant, state.theta, state.k);
    obs = observer_init(obs_cfg, model, state);
  }

  Vec2 control(double t) {
    const LineRef lr = line_ref(t, velocity, accel, stop_at);
    const double y = std::max(setup.y_start - lr.travel, setup.y_floor);
    const double y_dot = y > setup.y_floor ? -lr.speed : 0.0;
    const JointSample ref = joint_ref(setup, y, y_dot);
    state.k_target = Vec2::Constant(scase.stiffness);
    const Vec2 phi_d = motor_setpoint(model, ref.q, state.k);
    return pid_step(gains, pid, phi_d, ref.qd, state.phi, state.phi_dot, obs_cfg.dt, plant.tau_max) +
           gravity_torque<double>(model, ref.q);
  }
};

// Excursion past the surface and its rate for link state (theta, theta_dot).
std::pair<double, double> excursion(const ApproachSetup& s, const Vec2& theta, const Vec2& theta_dot) {
  const Vec2 ee = forward_kinematics<double>(Vec2(s.l1, s.l2), theta);
  const Vec2 v = jacobian(s.l1, s.l2, theta) * theta_dot;
  return {s.y_surface - ee(1), -v(1)};
}

}  // namespace

StabResult run_stab_scenario(int case_id, double velocity, const ArmParams& plant,
                             const ArmParams& model, const ObserverConfig& obs_cfg,
                             const Threshold& threshold, const ContactMedium& medium,
                             const StabGeometry& geom, const PidGains& gains, StabTrace* trace) {
  if (!(velocity > 0.0) || !std::isfinite(velocity)) throw InvalidArgument("stab velocity must be > 0");
  const StabCase scase = stab_case(case_id, plant);
  const ApproachSetup setup = make_setup(plant, geom, &medium);
  if (velocity * velocity / (2.0 * geom.accel) > geom.approach_distance)
    throw InvalidArgument("stab velocity is not reachable within the approach distance");

  ApproachRun run{plant, model, obs_cfg, gains, setup, scase, velocity, geom.accel, 0.0, {}, {}, {}};
  run.start();
  run.obs = with_threshold(run.obs, threshold);

  StabResult res;
  res.case_id = case_id;
  res.velocity = velocity;
  double cut = 0.0;
  std::optional<ReactionOverride> reaction;
  const double dt = obs_cfg.dt;
  const double t_arrive = velocity / (2.0 * geom.accel) + geom.approach_distance / velocity;
  const double t_max = t_arrive + 1.0 + geom.contact_window;

  const ExternalTorque contact = [&](const ArmState& s) {
    const auto [x, x_dot] = excursion(setup, s.theta, s.theta_dot);
    const double f = contact_force(medium, x, x_dot, cut);
    return Vec2(jacobian(setup.l1, setup.l2, s.theta).transpose() * Vec2(0.0, f));
  };

  for (long i = 0;; ++i) {
    const double t = static_cast<double>(i) * dt;
    if (t > t_max || (res.contact_at >= 0.0 && t > res.contact_at + geom.contact_window)) break;
    Vec2 tau;
    if (reaction) {
      tau = reaction->tau_m;
      if (reaction->k_target) run.state.k_target = *reaction->k_target;
    } else {
      tau = run.control(t);
    }
    const auto out = integrate(plant, run.state, tau, contact, dt);
    run.state = out.state;
    if (reaction) res.tau_after_detection = std::max(res.tau_after_detection, out.tau_applied.cwiseAbs().maxCoeff());

    const auto [x, x_dot] = excursion(setup, run.state.theta, run.state.theta_dot);
    const double f = contact_force(medium, x, x_dot, cut);
    if (f > 0.0 && res.contact_at < 0.0) res.contact_at = run.state.t;
    if (f > res.F_p) {
      res.F_p = f;
      res.peak_force_at = run.state.t;
    }
    cut = advance_cut(medium, x, cut, dt);
    res.d_p = std::max(res.d_p, cut * 1e3);

    run.obs = observer_step(obs_cfg, run.obs, model, run.state, out.tau_applied);
    if (!reaction) {
      if (auto ev = detect(run.obs)) {
        res.detected_at = ev->time;
        reaction = apply_reaction(scase.reaction, plant, run.state);
      }
    }
    if (trace) {
      trace->t.push_back(run.state.t);
      trace->force.push_back(f);
      trace->cut.push_back(cut);
      trace->k2.push_back(run.state.k(1));
      trace->tau2.push_back(out.tau_applied(1));
      trace->r2.push_back(run.obs.r(1));
    }
  }
  return res;
}

std::vector<StabResult> sweep(const std::vector<double>& velocities, const std::vector<int>& cases,
                              const ArmParams& plant, const ObserverConfig& obs_cfg,
                              const Threshold& threshold, const ContactMedium& medium,
                              const StabGeometry& geom, const PidGains& gains) {
  if (velocities.empty() || cases.empty()) throw InvalidArgument("sweep: empty velocity or case list");
  std::vector<StabResult> out;
  for (int c : cases)
    for (double v : velocities)
      out.push_back(run_stab_scenario(c, v, plant, plant, obs_cfg, threshold, medium, geom, gains));
  return out;
}

std::vector<Vec2> approach_residuals(int case_id, double velocity, const ArmParams& plant,
                                     const ArmParams& model, const ObserverConfig& obs_cfg,
                                     const StabGeometry& geom, const PidGains& gains) {
  const StabCase scase = stab_case(case_id, plant);
  const ApproachSetup setup = make_setup(plant, geom, nullptr);
  ApproachRun run{plant, model, obs_cfg, gains, setup, scase, velocity, geom.accel, geom.approach_distance,
                  {}, {}, {}};
  run.start();
  const double dt = obs_cfg.dt;
  // Rest time of the reference plus a settling tail.
  double t_end = 0.0;
  while (line_ref(t_end, velocity, geom.accel, geom.approach_distance).speed > 0.0 || t_end == 0.0) t_end += dt;
  t_end += 0.5;
  std::vector<Vec2> out;
  const ExternalTorque none = [](const ArmState&) { return Vec2(Vec2::Zero()); };
  for (long i = 0; static_cast<double>(i) * dt < t_end; ++i) {
    const Vec2 tau = run.control(static_cast<double>(i) * dt);
    const auto step_out = integrate(plant, run.state, tau, none, dt);
    run.state = step_out.state;
    run.obs = observer_step(obs_cfg, run.obs, model, run.state, step_out.tau_applied);
    out.push_back(run.obs.r);
  }
  return out;
}

CalibrationReport calibrate_with_mismatch(const ArmParams& nominal, const ObserverConfig& obs_cfg,
                                          const TrackingConfig& tracking, const PlanarPose& target,
                                          const StabGeometry& geom, const CalibrationSet& set) {
  CalibrationReport rep;
  std::vector<std::vector<Vec2>> traces;
  const double m = set.mass_mismatch;
  for (double s1 : {1.0 - m, 1.0 + m}) {
    for (double s2 : {1.0 - m, 1.0 + m}) {
      ArmParams plant = with_mass_scale(nominal, Vec2(s1, s2));
      if (set.perturb_motor_inertia) plant.motor_inertia = nominal.motor_inertia.cwiseProduct(Vec2(s1, s2));
      const auto log = track(plant, nominal, target, tracking, obs_cfg, std::nullopt);
      std::vector<Vec2> r;
      r.reserve(log.rows.size());
      for (const auto& row : log.rows) {
        r.push_back(row.r);
        rep.worst_tracking = rep.worst_tracking.cwiseMax(row.r.cwiseAbs());
      }
      traces.push_back(std::move(r));
      for (int c : set.cases) {
        for (double v : set.velocities) {
          auto r2 = approach_residuals(c, v, plant, nominal, obs_cfg, geom, tracking.gains);
          for (const auto& x : r2) rep.worst_approach = rep.worst_approach.cwiseMax(x.cwiseAbs());
          traces.push_back(std::move(r2));
        }
      }
    }
  }
  rep.runs = traces.size();
  rep.threshold = calibrate_threshold(obs_cfg, traces);
  return rep;
}

MediumCalibration calibrate_medium(const ContactMedium& base, const ArmParams& plant,
                                   const ObserverConfig& obs_cfg, const Threshold& threshold,
                                   const StabGeometry& geom, const PidGains& gains, double v_intact,
                                   double v_cut, int case_id, double tol) {
  if (!(v_cut > v_intact) || !(tol > 0.0)) throw InvalidArgument("calibrate_medium: need v_cut > v_intact, tol > 0");
  const auto cuts = [&](double fy, double v) {
    ContactMedium m = base;
    m.F_y = fy;
    return run_stab_scenario(case_id, v, plant, plant, obs_cfg, threshold, m, geom, gains).d_p > 0.0;
  };
  // Cutting is monotone in F_y; bisect each edge between an always-cut and a
  // never-cut bound. The peak elastic force grows with k_c * depth_limit.
  const auto edge = [&](double v) {
    double lo = tol, hi = base.k_c * base.depth_limit + base.c_c * v;
    if (!cuts(lo, v) || cuts(hi, v)) throw InfeasibleError("calibrate_medium: F_y search range does not bracket");
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      (cuts(mid, v) ? lo : hi) = mid;
    }
    return std::pair{lo, hi};  // lo still cuts, hi does not
  };
  MediumCalibration out;
  out.F_y_low = edge(v_intact).second;
  out.F_y_high = edge(v_cut).first;
  if (!(out.F_y_low < out.F_y_high)) throw InfeasibleError("calibrate_medium: no F_y separates the two velocities");
  out.medium = base;
  out.medium.F_y = 0.5 * (out.F_y_low + out.F_y_high);
  return out;
}

}  // namespace vsasrl
