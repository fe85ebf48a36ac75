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

#include "vsasrl/fsm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vsasrl/dynamics.hpp"

namespace vsasrl {

std::string to_string(TaskMode m) {
  switch (m) {
    case TaskMode::Home: return "S1";
    case TaskMode::AtDish: return "S2";
    case TaskMode::Setting: return "S3";
    case TaskMode::Cutting: return "S4";
  }
  return "?";
}

TaskMode task_mode_from_string(const std::string& s) {
  for (TaskMode m : {TaskMode::Home, TaskMode::AtDish, TaskMode::Setting, TaskMode::Cutting})
    if (to_string(m) == s) return m;
  throw InvalidArgument("unknown task state '" + s + "'");
}

std::string to_string(TaskEvent e) {
  switch (e) {
    case TaskEvent::B1On: return "B1_on";
    case TaskEvent::B1Off: return "B1_off";
    case TaskEvent::B2On: return "B2_on";
    case TaskEvent::B2Off: return "B2_off";
    case TaskEvent::B3Pressed: return "B3_pressed";
    case TaskEvent::B3Released: return "B3_released";
    case TaskEvent::Reached: return "reached";
    case TaskEvent::Collision: return "collision";
  }
  return "?";
}

TaskEvent button_event(const std::string& id, bool value) {
  if (id == "B1") return value ? TaskEvent::B1On : TaskEvent::B1Off;
  if (id == "B2") return value ? TaskEvent::B2On : TaskEvent::B2Off;
  if (id == "B3") return value ? TaskEvent::B3Pressed : TaskEvent::B3Released;
  throw InvalidArgument("unknown button '" + id + "'");
}

std::string to_string(StiffnessLevel s) { return s == StiffnessLevel::High ? "high" : "low"; }
std::string to_string(TorqueMode t) { return t == TorqueMode::Position ? "position" : "zero"; }

CooperativeRegion::CooperativeRegion(const Rect& rect, double cell_mm, double l1_mm, double l2_mm,
                                     const LimitBox& limits)
    : rect_(rect), cell_mm_(cell_mm), l1_(l1_mm), l2_(l2_mm), limits_(limits) {
  if (!(cell_mm > 0.0)) throw InvalidArgument("cooperative region: cell size must be > 0");
  for (const auto& c : rect.cell_centers(cell_mm))
    if (in_workspace(l1_, l2_, limits_, c)) cells_.push_back(c);
}

bool CooperativeRegion::contains(const PlanarPose& p) const {
  return rect_.contains(p.x, p.y) && in_workspace(l1_, l2_, limits_, p.vec());
}

PlanarPose CooperativeRegion::clamp(const PlanarPose& p) const {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw NonFiniteError("clamp_to_cooperative: non-finite position");
  if (contains(p)) return p;
  if (cells_.empty()) throw InfeasibleError("cooperative region has no reachable cell");
  const double h = 0.5 * cell_mm_;
  const Vec2 x = p.vec();
  // Cells are clipped to the rectangle like the raster itself.
  struct Box {
    Vec2 lo, hi;
    double d2;
  };
  std::vector<Box> boxes;
  boxes.reserve(cells_.size());
  for (const auto& c : cells_) {
    const Vec2 lo(std::max(c(0) - h, rect_.x_min), std::max(c(1) - h, rect_.y_min));
    const Vec2 hi(std::min(c(0) + h, rect_.x_max), std::min(c(1) + h, rect_.y_max));
    boxes.push_back({lo, hi, (x.cwiseMax(lo).cwiseMin(hi) - x).squaredNorm()});
  }
  std::stable_sort(boxes.begin(), boxes.end(), [](const Box& a, const Box& b) { return a.d2 < b.d2; });

  double best = std::numeric_limits<double>::infinity();
  Vec2 out = cells_.front();
  for (const auto& b : boxes) {
    if (b.d2 >= best) break;
    const Vec2 q = x.cwiseMax(b.lo).cwiseMin(b.hi);
    if (in_workspace(l1_, l2_, limits_, q)) {
      best = b.d2;
      out = q;
      continue;
    }
    // Part of the cell lies outside the arm's reach: search its reachable
    // part on a fine sub-grid.
    const int n = 50;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        const Vec2 s(b.lo(0) + (b.hi(0) - b.lo(0)) * i / n, b.lo(1) + (b.hi(1) - b.lo(1)) * j / n);
        const double d2 = (s - x).squaredNorm();
        if (d2 < best && in_workspace(l1_, l2_, limits_, s)) {
          best = d2;
          out = s;
        }
      }
    }
  }
  return PlanarPose::from(out);
}

std::vector<std::string> violations(const TaskConfig& c, const CooperativeRegion& region,
                                    const std::string& prefix) {
  std::vector<std::string> out;
  if (!region.contains(c.dish_center)) out.push_back(prefix + ".dish_center: must lie in the cooperative region");
  if (!c.home_pose.allFinite()) out.push_back(prefix + ".home_pose: must be finite");
  if (!(c.reach_tolerance_mm > 0.0)) out.push_back(prefix + ".reach_tolerance_mm: must be > 0");
  if (!(c.reach_speed_tolerance > 0.0)) out.push_back(prefix + ".reach_speed_tolerance: must be > 0");
  if (!(c.knife_period > 0.0)) out.push_back(prefix + ".knife_period: must be > 0");
  return out;
}

TaskState initial_task_state(const TaskConfig& cfg, const CooperativeRegion& region, const PlanarPose& home_ee) {
  TaskState s;
  s.target = home_ee;
  s.dish_target = region.clamp(cfg.dish_center);
  return s;
}

TaskCommands commands_for(const TaskState& s, const PlanarPose& home_ee) {
  TaskCommands c;
  c.target = s.mode == TaskMode::Home && !s.in_transit ? home_ee : s.target;
  if (s.faulted) {
    c.reaction = true;
    c.torque = TorqueMode::Zero;
    c.stiffness = StiffnessLevel::Low;
    return c;
  }
  if (s.in_transit) {
    c.stiffness = StiffnessLevel::Low;
    return c;
  }
  switch (s.mode) {
    case TaskMode::Setting:
      c.torque = TorqueMode::Zero;
      c.stiffness = StiffnessLevel::Low;
      break;
    case TaskMode::Cutting:
      c.knife = true;
      break;
    default:
      break;
  }
  return c;
}

FsmStep fsm_step(const TaskState& s, TaskEvent e, const CooperativeRegion& region, const PlanarPose& ee,
                 const PlanarPose& home_ee) {
  FsmStep out;
  out.state = s;
  auto reject = [&](std::string why) {
    out.state = s;
    out.accepted = false;
    out.note = to_string(s.mode) + (s.in_transit ? " transit" : "") + " ignores " + to_string(e) + ": " + why;
  };
  auto go_home = [&] {
    out.state.mode = TaskMode::Home;
    out.state.in_transit = true;
    out.state.knife = false;
    out.state.faulted = false;
    out.state.target = home_ee;
  };

  if (s.faulted) {
    if (e == TaskEvent::B1Off) go_home();
    else reject("collision reaction active, switch B1 off to reset");
    out.commands = commands_for(out.state, home_ee);
    return out;
  }

  switch (e) {
    case TaskEvent::B1On:
      if (s.mode != TaskMode::Home) {
        reject("already away from home");
        break;
      }
      out.state.mode = TaskMode::AtDish;
      out.state.in_transit = true;
      out.state.target = s.dish_target;
      break;
    case TaskEvent::B1Off:
      if (s.mode == TaskMode::Home) reject("already homing or at home");
      else go_home();
      break;
    case TaskEvent::Reached:
      if (!s.in_transit) reject("not in transit");
      else out.state.in_transit = false;
      break;
    case TaskEvent::B2On:
      if (s.mode != TaskMode::AtDish || s.in_transit) reject("setting needs S2 at rest");
      else out.state.mode = TaskMode::Setting;
      break;
    case TaskEvent::B2Off:
      if (s.mode != TaskMode::Setting) {
        reject("not in setting");
        break;
      }
      out.state.mode = TaskMode::AtDish;
      out.state.in_transit = true;
      out.state.dish_target = region.clamp(ee);
      out.state.target = out.state.dish_target;
      break;
    case TaskEvent::B3Pressed:
      if (s.mode != TaskMode::AtDish || s.in_transit) reject("cutting needs S2 at rest");
      else {
        out.state.mode = TaskMode::Cutting;
        out.state.knife = true;
      }
      break;
    case TaskEvent::B3Released:
      if (s.mode != TaskMode::Cutting) reject("not cutting");
      else {
        out.state.mode = TaskMode::AtDish;
        out.state.knife = false;
      }
      break;
    case TaskEvent::Collision:
      if (!s.in_transit) reject("detections act only in transit");
      else {
        out.state.in_transit = false;
        out.state.knife = false;
        out.state.faulted = true;
      }
      break;
  }
  out.commands = commands_for(out.state, home_ee);
  return out;
}

std::vector<std::string> contract_violations(const TaskState& s, const TaskCommands& c) {
  std::vector<std::string> out;
  if (s.faulted) {
    if (!c.reaction || c.torque != TorqueMode::Zero) out.push_back("fault without reaction");
    if (c.knife) out.push_back("knife on during fault");
    return out;
  }
  if (s.in_transit && c.stiffness != StiffnessLevel::Low) out.push_back("transit needs low stiffness");
  const bool rest = !s.in_transit && (s.mode == TaskMode::Home || s.mode == TaskMode::AtDish);
  if (rest && c.stiffness != StiffnessLevel::High) out.push_back("rest needs high stiffness");
  if (s.mode == TaskMode::Setting && c.torque != TorqueMode::Zero) out.push_back("setting needs zero torque");
  if ((s.mode == TaskMode::Cutting) != c.knife) out.push_back("knife must run exactly in cutting");
  if (s.mode == TaskMode::Cutting && s.in_transit) out.push_back("cutting while in transit");
  return out;
}

HomingResult home(const ArmParams& p, const ArmState& start, const Vec2& encoder_offset, const Vec2& home_pose,
                  const HomingConfig& cfg, const PidGains& gains, double dt) {
  if (!(dt > 0.0) || !(cfg.search_speed > 0.0) || !(cfg.move_speed > 0.0))
    throw InvalidArgument("home: dt and speeds must be > 0");
  const JointLimits limits{p.theta_min, p.theta_max};
  if (!limits.contains(home_pose)) throw JointLimitError("home: home pose outside joint limits");
  const ExternalTorque none = [](const ArmState&) { return Vec2(Vec2::Zero()); };

  HomingResult res;
  ArmState s = start;
  s.k_target = Vec2::Constant(std::clamp(cfg.stiffness, p.k_min, p.k_max));
  PidState pid;
  const double t0 = s.t;
  const auto tick = [&](const Vec2& tau) { s = integrate(p, s, tau, none, dt).state; };

  // Phase 1: creep down in encoder coordinates until both switches trip.
  Vec2 ref = s.phi + encoder_offset;
  const auto check_flags = [&] {
    for (int j = 0; j < 2; ++j) {
      if (!res.flags[j] && s.theta(j) <= cfg.switch_position(j)) {
        res.flags[j] = true;
        res.flag_time[j] = s.t - t0;
        res.offset_estimate(j) = s.theta(j) + encoder_offset(j) - cfg.switch_position(j);
      }
    }
  };
  check_flags();
  while (!(res.flags[0] && res.flags[1])) {
    if (s.t - t0 > cfg.timeout) throw TimeoutError("home: limit switch not reached within timeout");
    Vec2 ref_dot = Vec2::Zero();
    for (int j = 0; j < 2; ++j) {
      if (res.flags[j]) continue;
      ref(j) -= cfg.search_speed * dt;
      ref_dot(j) = -cfg.search_speed;
    }
    const Vec2 meas_theta = s.theta + encoder_offset;
    const Vec2 ff = gravity_torque<double>(p, meas_theta);
    tick(pid_step(gains, pid, ref, ref_dot, s.phi + encoder_offset, s.phi_dot, dt, p.tau_max) + ff);
    check_flags();
  }

  // Phase 2: move to the home pose in corrected coordinates.
  const Vec2 correction = encoder_offset - res.offset_estimate;
  const Vec2 q0 = s.theta + correction;
  JointPlan plan;
  for (int j = 0; j < 2; ++j) {
    const double a = cfg.move_speed;  // reach speed in 1 s
    plan[j] = plan_trapezoid(q0(j), home_pose(j), cfg.move_speed, a);
  }
  const double t_move = duration(plan) + cfg.settle;
  pid = PidState{};
  const double t1 = s.t;
  while (s.t - t1 < t_move - 0.5 * dt) {
    const JointSample r = sample(plan, s.t - t1);
    const Vec2 phi_d = motor_setpoint(p, r.q, s.k);
    const Vec2 ff = gravity_torque<double>(p, r.q);
    tick(pid_step(gains, pid, phi_d, r.qd, s.phi + correction, s.phi_dot, dt, p.tau_max) + ff);
  }
  res.state = s;
  res.duration = s.t - t0;
  res.reported = s.theta + correction;
  return res;
}

}  // namespace vsasrl
