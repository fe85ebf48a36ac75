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

// Bimanual-eating task state machine, the cooperative-region projection used
// for every commanded target, and the limit-switch homing routine.

#ifndef VSASRL_FSM_HPP
#define VSASRL_FSM_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vsasrl/arm.hpp"
#include "vsasrl/kinematics.hpp"
#include "vsasrl/motion.hpp"
#include "vsasrl/workspace.hpp"

namespace vsasrl {

/// S1 home, S2 at dish, S3 setting (hand guiding), S4 cutting.
enum class TaskMode { Home, AtDish, Setting, Cutting };

std::string to_string(TaskMode m);  // "S1" .. "S4"
TaskMode task_mode_from_string(const std::string& s);

struct TaskState {
  TaskMode mode = TaskMode::Home;
  bool in_transit = false;
  bool knife = false;
  bool faulted = false;    // reaction active after a collision in transit
  PlanarPose target;       // current commanded EE target, mm
  PlanarPose dish_target;  // recorded dish position, mm

  bool operator==(const TaskState&) const = default;
};

/// Operator buttons and plant status, one alphabet.
enum class TaskEvent { B1On, B1Off, B2On, B2Off, B3Pressed, B3Released, Reached, Collision };

inline constexpr std::array<TaskEvent, 8> kTaskEvents{
    TaskEvent::B1On,      TaskEvent::B1Off,      TaskEvent::B2On,    TaskEvent::B2Off,
    TaskEvent::B3Pressed, TaskEvent::B3Released, TaskEvent::Reached, TaskEvent::Collision};

std::string to_string(TaskEvent e);

/// Button id ("B1".."B3") and value to an event. B1/B2 are latched switches
/// (on/off), B3 is momentary (pressed/released).
TaskEvent button_event(const std::string& id, bool value);

enum class StiffnessLevel { High, Low };
enum class TorqueMode { Position, Zero };

struct TaskCommands {
  PlanarPose target;  // mm
  StiffnessLevel stiffness = StiffnessLevel::High;
  TorqueMode torque = TorqueMode::Position;
  bool knife = false;
  bool reaction = false;  // collision reaction owns torque and stiffness
};

std::string to_string(StiffnessLevel s);
std::string to_string(TorqueMode t);

/// The task's cooperative region rasterized at `cell_mm`, restricted to cells
/// whose centre the arm can reach.
class CooperativeRegion {
 public:
  CooperativeRegion(const Rect& rect, double cell_mm, double l1_mm, double l2_mm, const LimitBox& limits);

  bool contains(const PlanarPose& p) const;
  /// Nearest point of the region (Euclidean): raster cells intersected with
  /// the reachable set, resolved to cell_mm / 50 where a cell is only partly
  /// reachable.
  PlanarPose clamp(const PlanarPose& p) const;

  const Rect& rect() const { return rect_; }
  const std::vector<Vec2>& cells() const { return cells_; }
  double cell_mm() const { return cell_mm_; }

 private:
  Rect rect_;
  double cell_mm_;
  double l1_, l2_;
  LimitBox limits_;
  std::vector<Vec2> cells_;  // reachable cell centres
};

struct TaskConfig {
  PlanarPose dish_center{-150.0, 650.0};       // mm
  Vec2 home_pose{deg2rad(5.0), deg2rad(10.0)};  // rad
  double reach_tolerance_mm = 5.0;
  double reach_speed_tolerance = deg2rad(0.5);  // rad/s
  double knife_period = 0.5;                    // s, reciprocation cycle
};

std::vector<std::string> violations(const TaskConfig& c, const CooperativeRegion& region,
                                    const std::string& prefix = "task");

struct FsmStep {
  TaskState state;
  TaskCommands commands;
  bool accepted = true;  // false: (state, event) undefined, state unchanged
  std::string note;      // reason when not accepted
};

/// The initial state: S1 at rest, dish target at the clamped dish centre.
TaskState initial_task_state(const TaskConfig& cfg, const CooperativeRegion& region, const PlanarPose& home_ee);

/// Commands implied by a state.
TaskCommands commands_for(const TaskState& s, const PlanarPose& home_ee);

/// Total transition function. `ee` is the current end-effector position,
/// `home_ee` the FK of the home pose.
FsmStep fsm_step(const TaskState& s, TaskEvent e, const CooperativeRegion& region, const PlanarPose& ee,
                 const PlanarPose& home_ee);

/// State/command contract violations (empty when consistent).
std::vector<std::string> contract_violations(const TaskState& s, const TaskCommands& c);

/// Homing against the lower-limit switches.
struct HomingConfig {
  double search_speed = deg2rad(5.0);                      // rad/s toward the switches
  Vec2 switch_position{deg2rad(0.5), deg2rad(0.5)};        // rad, true joint angle at trip
  double move_speed = deg2rad(30.0);                       // rad/s, switch -> home
  double settle = 1.0;                                     // s
  double timeout = 60.0;                                   // s for the switch search
  double stiffness = 8000.0;                               // N m/rad
};

struct HomingResult {
  ArmState state;                  // true plant state at the end
  Vec2 offset_estimate = Vec2::Zero();  // encoder reading minus true angle
  std::array<bool, 2> flags{false, false};
  std::array<double, 2> flag_time{-1.0, -1.0};
  double duration = 0.0;
  Vec2 reported = Vec2::Zero();    // corrected encoder angles at the end
};

/// Runs the plant from `start` (true state) with incremental encoders that
/// read the true angle plus `encoder_offset`. Throws TimeoutError when a
/// switch does not trip within cfg.timeout.
HomingResult home(const ArmParams& p, const ArmState& start, const Vec2& encoder_offset, const Vec2& home_pose,
                  const HomingConfig& cfg = {}, const PidGains& gains = {}, double dt = 1e-3);

}  // namespace vsasrl

#endif  // VSASRL_FSM_HPP
