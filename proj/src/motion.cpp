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

#include "vsasrl/motion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vsasrl/dynamics.hpp"

namespace vsasrl {

namespace {

void check_endpoints(double q0, double qf, double q_min, double q_max) {
  if (!std::isfinite(q0) || !std::isfinite(qf)) throw NonFiniteError("trajectory endpoints must be finite");
  const double tol = 1e-9;
  if (q0 < q_min - tol || q0 > q_max + tol || qf < q_min - tol || qf > q_max + tol) {
    std::ostringstream os;
    os << "trajectory endpoint outside joint limits [" << q_min << ", " << q_max << "]: q0 = " << q0
       << ", qf = " << qf;
    throw JointLimitError(os.str());
  }
}

}  // namespace

TrapezoidalProfile plan_trapezoid(double q0, double qf, double v_max, double a_max, double q_min,
                                  double q_max) {
  if (!(v_max > 0.0) || !(a_max > 0.0)) throw InvalidArgument("plan_trapezoid: v_max and a_max must be > 0");
  check_endpoints(q0, qf, q_min, q_max);
  TrapezoidalProfile p{q0, qf, v_max, a_max};
  const double d = std::abs(qf - q0);
  if (d <= 1e-12) return p;  // below IK round-off: nothing to move
  if (d >= v_max * v_max / a_max) {
    p.v_peak = v_max;
    p.t_acc = v_max / a_max;
    p.t_coast = (d - v_max * v_max / a_max) / v_max;
  } else {
    p.v_peak = std::sqrt(a_max * d);
    p.t_acc = p.v_peak / a_max;
  }
  p.t_dec = p.t_acc;
  p.t_total = p.t_acc + p.t_coast + p.t_dec;
  return p;
}

TrapezoidalProfile plan_timed(double q0, double qf, double t_acc, double t_total, double q_min,
                              double q_max) {
  if (!(t_acc > 0.0) || !(t_total >= 2.0 * t_acc))
    throw InvalidArgument("plan_timed: need t_acc > 0 and t_total >= 2 t_acc");
  check_endpoints(q0, qf, q_min, q_max);
  TrapezoidalProfile p{q0, qf};
  const double d = std::abs(qf - q0);
  if (d <= 1e-12) return p;  // below IK round-off: nothing to move
  p.v_peak = d / (t_total - t_acc);
  p.v_max = p.v_peak;
  p.a_max = p.v_peak / t_acc;
  p.t_acc = t_acc;
  p.t_dec = t_acc;
  p.t_coast = t_total - 2.0 * t_acc;
  p.t_total = t_total;
  return p;
}

ProfileSample sample(const TrapezoidalProfile& p, double t) {
  if (p.t_total <= 0.0) return {p.q0, 0.0, 0.0};
  if (t > p.t_total) return {p.qf, 0.0, 0.0};
  t = std::max(t, 0.0);
  const double dir = p.qf >= p.q0 ? 1.0 : -1.0;
  const double a = p.v_peak / p.t_acc;
  const double d = p.v_peak / p.t_dec;
  const double t1 = p.t_acc, t2 = p.t_acc + p.t_coast;
  const double s1 = 0.5 * a * t1 * t1;
  if (t < t1) return {p.q0 + dir * 0.5 * a * t * t, dir * a * t, dir * a};
  if (t < t2) return {p.q0 + dir * (s1 + p.v_peak * (t - t1)), dir * p.v_peak, 0.0};
  const double tr = p.t_total - t;  // time remaining
  return {p.qf - dir * 0.5 * d * tr * tr, dir * d * tr, -dir * d};
}

JointPlan plan_joint_move(const Vec2& q0, const Vec2& qf, double t_acc, double t_total,
                          const JointLimits& limits) {
  JointPlan plan;
  for (int j = 0; j < 2; ++j)
    plan[j] = plan_timed(q0(j), qf(j), t_acc, t_total, limits.min(j), limits.max(j));
  return plan;
}

JointSample sample(const JointPlan& plan, double t) {
  JointSample s;
  for (int j = 0; j < 2; ++j) {
    const auto ps = sample(plan[j], t);
    s.q(j) = ps.q;
    s.qd(j) = ps.qd;
    s.qdd(j) = ps.qdd;
  }
  return s;
}

double duration(const JointPlan& plan) { return std::max(plan[0].t_total, plan[1].t_total); }

JointPlan time_scaled(const JointPlan& plan, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw InvalidArgument("time_scaled: factor must be > 0");
  JointPlan out = plan;
  for (auto& p : out) {
    p.t_acc *= factor;
    p.t_coast *= factor;
    p.t_dec *= factor;
    p.t_total *= factor;
    p.v_peak /= factor;
    p.v_max /= factor;
    p.a_max /= factor * factor;
  }
  return out;
}

namespace {

double ee_speed(const JointPlan& plan, double l1, double l2, double t) {
  const auto s = sample(plan, t);
  return (jacobian(l1, l2, s.q) * s.qd).norm();
}

}  // namespace

double peak_cartesian_speed(const JointPlan& plan, double l1, double l2) {
  const double T = duration(plan);
  if (T <= 0.0) return 0.0;
  constexpr int kSamples = 20000;
  const double h = T / kSamples;
  std::vector<double> v(kSamples + 1);
  for (int i = 0; i <= kSamples; ++i) v[static_cast<std::size_t>(i)] = ee_speed(plan, l1, l2, i * h);
  double best = *std::max_element(v.begin(), v.end());
  // Golden-section refinement around each local maximum of the samples.
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i = 0; i <= kSamples; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const bool left = i == 0 || v[u] >= v[u - 1];
    const bool right = i == kSamples || v[u] >= v[u + 1];
    if (!(left && right) || v[u] < 0.99 * best) continue;
    double a = std::max(0.0, (i - 1) * h), b = std::min(T, (i + 1) * h);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = ee_speed(plan, l1, l2, c), fd = ee_speed(plan, l1, l2, d);
    for (int it = 0; it < 60; ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = ee_speed(plan, l1, l2, c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = ee_speed(plan, l1, l2, d);
      }
    }
    best = std::max({best, fc, fd});
  }
  return best;
}

CappedPlan cap_cartesian_speed(const JointPlan& plan, double l1, double l2, double cap) {
  if (!(cap > 0.0)) throw InvalidArgument("cap_cartesian_speed: cap must be > 0");
  const double peak = peak_cartesian_speed(plan, l1, l2);
  if (peak <= cap) return {plan, 1.0};
  // Speeds scale exactly by 1/factor; the small margin absorbs the sampling
  // resolution of the peak search.
  const double factor = peak / cap * (1.0 + 1e-9);
  return {time_scaled(plan, factor), factor};
}

StiffnessSchedule schedule_for(const JointPlan& plan, double k_high, double k_low) {
  const auto& lead = plan[0].t_total >= plan[1].t_total ? plan[0] : plan[1];
  return {k_high, k_low, lead.t_acc, lead.t_dec, lead.t_total};
}

double stiffness_at(const StiffnessSchedule& s, double t) {
  if (t <= 0.5 * s.t_acc) return s.k_high;
  if (t >= s.t_total - 0.5 * s.t_dec) return s.k_high;
  return s.k_low;
}

std::vector<std::string> violations(const PidGains& g, const std::string& prefix) {
  std::vector<std::string> out;
  auto nonneg = [](const Vec2& v) { return v.allFinite() && (v.array() >= 0.0).all(); };
  if (!nonneg(g.kp)) out.push_back(prefix + ".kp: entries must be finite and >= 0");
  if (!nonneg(g.ki)) out.push_back(prefix + ".ki: entries must be finite and >= 0");
  if (!nonneg(g.kd)) out.push_back(prefix + ".kd: entries must be finite and >= 0");
  if (!(g.integral_clamp.allFinite() && (g.integral_clamp.array() > 0.0).all()))
    out.push_back(prefix + ".integral_clamp: entries must be finite and > 0");
  return out;
}

Vec2 pid_step(const PidGains& g, PidState& st, const Vec2& q_d, const Vec2& qd_d, const Vec2& q,
              const Vec2& qd, double dt, double tau_max) {
  if (!(dt > 0.0)) throw InvalidArgument("pid_step: dt must be > 0");
  const Vec2 e = q_d - q;
  const Vec2 ed = qd_d - qd;
  Vec2 tau;
  for (int j = 0; j < 2; ++j) {
    double integral = st.integral(j) + e(j) * dt;
    if (g.ki(j) > 0.0) {
      const double lim = g.integral_clamp(j) / g.ki(j);
      integral = std::clamp(integral, -lim, lim);
    }
    const double u = g.kp(j) * e(j) + g.ki(j) * integral + g.kd(j) * ed(j);
    // Conditional integration: hold the integral while saturated and the
    // error pushes further into saturation.
    if (std::abs(u) > tau_max && u * e(j) > 0.0) integral = st.integral(j);
    st.integral(j) = integral;
    tau(j) = std::clamp(g.kp(j) * e(j) + g.ki(j) * integral + g.kd(j) * ed(j), -tau_max, tau_max);
  }
  return tau;
}

std::string to_string(FeedbackSide s) { return s == FeedbackSide::Motor ? "motor" : "link"; }

FeedbackSide feedback_side_from_string(const std::string& s) {
  if (s == "motor") return FeedbackSide::Motor;
  if (s == "link") return FeedbackSide::Link;
  throw InvalidArgument("unknown feedback side '" + s + "'");
}

Vec2 motor_setpoint(const ArmParams& p, const Vec2& q, const Vec2& k) {
  return q + k.cwiseInverse().cwiseProduct(gravity_torque<double>(p, q));
}

std::vector<std::string> violations(const TrackingConfig& c, const std::string& prefix) {
  std::vector<std::string> out;
  auto require = [&](bool ok, const std::string& field, const char* what) {
    if (!ok) out.push_back(prefix + "." + field + ": " + what);
  };
  require(c.home.allFinite(), "home", "must be finite");
  require(std::isfinite(c.t_acc) && c.t_acc > 0.0, "t_acc", "must be > 0");
  require(std::isfinite(c.t_total) && c.t_total >= 2.0 * c.t_acc, "t_total", "must be >= 2 t_acc");
  require(std::isfinite(c.cartesian_cap) && c.cartesian_cap > 0.0, "cartesian_cap", "must be > 0");
  require(std::isfinite(c.k_low) && c.k_low > 0.0, "k_low", "must be > 0");
  require(std::isfinite(c.k_high) && c.k_high >= c.k_low, "k_high", "must be >= k_low");
  require(std::isfinite(c.settle) && c.settle >= 0.0, "settle", "must be >= 0");
  for (auto& v : violations(c.gains, prefix + ".gains")) out.push_back(v);
  return out;
}

ArmState tracking_start(const ArmParams& plant, const TrackingConfig& cfg) {
  ArmState s = rest_state(cfg.home, cfg.k_high);
  s.phi = motor_setpoint(plant, s.theta, s.k);
  return s;
}

TrajectoryLog track(const ArmParams& plant, const ArmParams& model, const PlanarPose& target,
                    const TrackingConfig& cfg, const ObserverConfig& obs_cfg,
                    const std::optional<Threshold>& threshold) {
  if (!std::isfinite(target.x) || !std::isfinite(target.y)) throw NonFiniteError("track: non-finite target");
  const double l1 = plant.length(0), l2 = plant.length(1);
  const JointLimits limits{plant.theta_min, plant.theta_max};
  TrajectoryLog log;
  log.dt = obs_cfg.dt;
  log.target = target;
  log.theta_target = inverse_kinematics(l1 * 1e3, l2 * 1e3, target, cfg.elbow, limits);

  const JointPlan raw = plan_joint_move(cfg.home, log.theta_target, cfg.t_acc, cfg.t_total, limits);
  const CappedPlan capped = cap_cartesian_speed(raw, l1, l2, cfg.cartesian_cap);
  const JointPlan& plan = capped.plan;
  log.time_scale = capped.scale;
  log.plan_duration = duration(plan);
  log.peak_ee_speed = peak_cartesian_speed(plan, l1, l2);
  const StiffnessSchedule sched = schedule_for(plan, cfg.k_high, cfg.k_low);
  // A zero-length plan has no windows; it rests at high stiffness.
  const double plan_end = std::max(log.plan_duration, cfg.t_total);

  ArmState s = tracking_start(plant, cfg);
  ObserverState obs = observer_init(obs_cfg, model, s);
  if (threshold) obs = with_threshold(obs, *threshold);
  PidState pid;
  std::optional<ReactionOverride> reaction;
  const double dt = obs_cfg.dt;
  const auto n = static_cast<long>(std::llround((plan_end + cfg.settle) / dt));

  Vec2 sq_err = Vec2::Zero();
  auto record = [&](const Vec2& q_d, const Vec2& tau) {
    TrackRow row;
    row.t = s.t;
    row.q_d = q_d;
    row.q = s.theta;
    row.phi = s.phi;
    row.k = s.k;
    row.tau = tau;
    row.r = obs.r;
    row.eps_r = obs.epsilon_r;
    const auto ee = forward_kinematics(l1 * 1e3, l2 * 1e3, s.theta);
    row.x_mm = ee.x;
    row.y_mm = ee.y;
    const Vec2 err = (q_d - s.theta).cwiseAbs() * (180.0 / kPi);
    sq_err += err.cwiseProduct(err);
    log.max_abs_error_deg = log.max_abs_error_deg.cwiseMax(err);
    log.rows.push_back(row);
  };

  log.rows.reserve(static_cast<std::size_t>(n + 1));
  record(sample(plan, 0.0).q, Vec2::Zero());
  for (long i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const JointSample ref = sample(plan, t);
    Vec2 tau;
    if (reaction) {
      tau = reaction->tau_m;
      if (reaction->k_target) s.k_target = *reaction->k_target;
    } else {
      const double k_cmd = cfg.stiffness_schedule && log.plan_duration > 0.0 ? stiffness_at(sched, t) : cfg.k_high;
      s.k_target = Vec2::Constant(std::clamp(k_cmd, plant.k_min, plant.k_max));
      const Vec2 ff = gravity_torque<double>(model, ref.q);
      if (cfg.side == FeedbackSide::Motor) {
        const Vec2 phi_d = motor_setpoint(model, ref.q, s.k);
        tau = pid_step(cfg.gains, pid, phi_d, ref.qd, s.phi, s.phi_dot, dt, plant.tau_max) + ff;
      } else {
        // Link position error with collocated motor-velocity damping; a
        // derivative on the link velocity destabilizes the two-mass loop.
        tau = pid_step(cfg.gains, pid, ref.q, ref.qd, s.theta, s.phi_dot, dt, plant.tau_max) + ff;
      }
    }
    const auto out = integrate(plant, s, tau, [](const ArmState&) { return Vec2(Vec2::Zero()); }, dt);
    s = out.state;
    log.saturated = log.saturated || out.saturated;
    log.limit_hit = log.limit_hit || out.limit_hit;
    obs = observer_step(obs_cfg, obs, model, s, out.tau_applied);
    if (threshold && !reaction) {
      if (auto ev = detect(obs)) {
        log.detections.push_back(*ev);
        reaction = apply_reaction(cfg.reaction, plant, s);
      }
    }
    record(sample(plan, s.t).q, out.tau_applied);
  }
  const double count = static_cast<double>(log.rows.size());
  log.rms_error_deg = (sq_err / count).cwiseSqrt();
  const auto final_ee = forward_kinematics(l1 * 1e3, l2 * 1e3, s.theta);
  log.final_cartesian_error_mm = std::hypot(final_ee.x - target.x, final_ee.y - target.y);
  return log;
}

}  // namespace vsasrl
