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

// Joint trajectory generation, the two-level stiffness schedule, Cartesian
// speed capping and PID tracking of the elastic-joint arm.

#ifndef VSASRL_MOTION_HPP
#define VSASRL_MOTION_HPP

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vsasrl/arm.hpp"
#include "vsasrl/common.hpp"
#include "vsasrl/kinematics.hpp"
#include "vsasrl/observer.hpp"
#include "vsasrl/reaction.hpp"

namespace vsasrl {

/// Accelerate / coast / decelerate plan for one joint. v_peak is the coast
/// speed (below v_max for a triangular plan).
struct TrapezoidalProfile {
  double q0 = 0.0;
  double qf = 0.0;
  double v_max = 0.0;
  double a_max = 0.0;
  double t_acc = 0.0;
  double t_coast = 0.0;
  double t_dec = 0.0;
  double t_total = 0.0;
  double v_peak = 0.0;
};

/// Throws InvalidArgument for non-positive limits and JointLimitError when q0
/// or qf lies outside [q_min, q_max].
TrapezoidalProfile plan_trapezoid(double q0, double qf, double v_max, double a_max,
                                  double q_min = -std::numeric_limits<double>::infinity(),
                                  double q_max = std::numeric_limits<double>::infinity());

/// Symmetric plan with prescribed acceleration time and total time.
TrapezoidalProfile plan_timed(double q0, double qf, double t_acc, double t_total,
                              double q_min = -std::numeric_limits<double>::infinity(),
                              double q_max = std::numeric_limits<double>::infinity());

struct ProfileSample {
  double q = 0.0;
  double qd = 0.0;
  double qdd = 0.0;
};

/// t is clamped to [0, t_total]; past the end the profile rests at qf.
ProfileSample sample(const TrapezoidalProfile& p, double t);

using JointPlan = std::array<TrapezoidalProfile, 2>;

struct JointSample {
  Vec2 q = Vec2::Zero();
  Vec2 qd = Vec2::Zero();
  Vec2 qdd = Vec2::Zero();
};

/// Both joints on the same (t_acc, t_total) timing.
JointPlan plan_joint_move(const Vec2& q0, const Vec2& qf, double t_acc, double t_total,
                          const JointLimits& limits = {});

JointSample sample(const JointPlan& plan, double t);
double duration(const JointPlan& plan);

/// Uniform time-scaling by `factor` >= 1 (slower); the path is unchanged.
JointPlan time_scaled(const JointPlan& plan, double factor);

/// Peak of |J(q_d) qd_d| over the plan, by dense sampling with local
/// refinement. Lengths in m, result in m/s.
double peak_cartesian_speed(const JointPlan& plan, double l1, double l2);

struct CappedPlan {
  JointPlan plan;
  double scale = 1.0;  // applied time-scaling factor
};

/// Time-scales the plan so the end-effector speed never exceeds `cap` (m/s).
CappedPlan cap_cartesian_speed(const JointPlan& plan, double l1, double l2, double cap);

/// High stiffness on [0, t_acc/2] and [t_total - t_dec/2, t_total] (and at
/// rest after the plan), low stiffness in between.
struct StiffnessSchedule {
  double k_high = 8000.0;
  double k_low = 70.0;
  double t_acc = 1.0;
  double t_dec = 1.0;
  double t_total = 6.0;
};

StiffnessSchedule schedule_for(const JointPlan& plan, double k_high, double k_low);
double stiffness_at(const StiffnessSchedule& s, double t);

struct PidGains {
  Vec2 kp{900.0, 600.0};           // N m/rad
  Vec2 ki{1500.0, 1000.0};         // N m/(rad s)
  Vec2 kd{120.0, 80.0};            // N m s/rad
  Vec2 integral_clamp{10.0, 10.0}; // N m, bound on |ki * integral|
};

std::vector<std::string> violations(const PidGains& g, const std::string& prefix = "gains");

struct PidState {
  Vec2 integral = Vec2::Zero();  // rad s
};

/// tau = kp e + ki int(e) + kd de/dt with e = q_d - q, de/dt = qd_d - qd. The
/// integral is clamped so |ki int(e)| <= integral_clamp and is frozen while
/// the output saturates in the direction of the error. Output saturated to
/// +-tau_max.
Vec2 pid_step(const PidGains& g, PidState& st, const Vec2& q_d, const Vec2& qd_d, const Vec2& q,
              const Vec2& qd, double dt, double tau_max = 35.0);

/// Which coordinate the PID closes the loop on. Motor-side control tracks the
/// motor position that statically holds the desired link position. Link-side
/// control acts on the link position error with damping on the motor
/// velocity; its proportional gain must stay below the joint stiffness, so
/// it suits runs without the low-stiffness phase.
enum class FeedbackSide { Motor, Link };

std::string to_string(FeedbackSide s);
FeedbackSide feedback_side_from_string(const std::string& s);

/// Motor position holding link position q against gravity at stiffness k.
Vec2 motor_setpoint(const ArmParams& p, const Vec2& q, const Vec2& k);

struct TrackingConfig {
  Vec2 home{deg2rad(5.0), deg2rad(10.0)};  // rad
  Elbow elbow = Elbow::Up;
  double t_acc = 1.0;                // s
  double t_total = 6.0;              // s
  double cartesian_cap = 0.4;        // m/s
  double k_high = 8000.0;            // N m/rad
  double k_low = 70.0;               // N m/rad
  bool stiffness_schedule = true;    // false holds k_high throughout
  FeedbackSide side = FeedbackSide::Motor;
  PidGains gains;
  double settle = 0.0;               // s simulated after the plan
  ReactionStrategy reaction = ReactionStrategy::ZeroTorquePlusSoften;
};

std::vector<std::string> violations(const TrackingConfig& c, const std::string& prefix = "tracking");

struct TrackRow {
  double t = 0.0;
  Vec2 q_d = Vec2::Zero();
  Vec2 q = Vec2::Zero();
  Vec2 phi = Vec2::Zero();
  Vec2 k = Vec2::Zero();
  Vec2 tau = Vec2::Zero();
  Vec2 r = Vec2::Zero();
  Vec2 eps_r = Vec2::Zero();
  double x_mm = 0.0;
  double y_mm = 0.0;
};

struct TrajectoryLog {
  double dt = 1e-3;
  std::vector<TrackRow> rows;  // one per tick, t = i dt
  PlanarPose target;           // mm
  Vec2 theta_target = Vec2::Zero();
  double plan_duration = 0.0;
  double time_scale = 1.0;
  Vec2 rms_error_deg = Vec2::Zero();
  Vec2 max_abs_error_deg = Vec2::Zero();
  double final_cartesian_error_mm = 0.0;
  double peak_ee_speed = 0.0;  // m/s, of the plan
  std::vector<DetectionEvent> detections;
  bool saturated = false;
  bool limit_hit = false;
};

/// Plans home -> IK(target) and runs it at the observer's dt with the
/// observer on `model`. Detection (only with a threshold) triggers the
/// configured reaction for the rest of the run. Throws UnreachableTarget /
/// JointLimitError from IK.
TrajectoryLog track(const ArmParams& plant, const ArmParams& model, const PlanarPose& target,
                    const TrackingConfig& cfg, const ObserverConfig& obs_cfg,
                    const std::optional<Threshold>& threshold);

/// Starting state of a tracking run: at rest at `home`, high stiffness, motor
/// deflected to hold gravity.
ArmState tracking_start(const ArmParams& plant, const TrackingConfig& cfg);

}  // namespace vsasrl

#endif  // VSASRL_MOTION_HPP
