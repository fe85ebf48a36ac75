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

// The interactive session: plant, observer, controller and task FSM advanced
// together at the observer's 1 kHz tick, driven by queued operator commands.
// Batch runs and the WebSocket server both drive this class.

#ifndef VSASRL_SESSION_HPP
#define VSASRL_SESSION_HPP

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "vsasrl/config.hpp"

namespace vsasrl {

struct ButtonCommand {
  std::string id;  // "B1", "B2" or "B3"
  bool value = false;
};
struct SetTargetCommand {
  PlanarPose target;  // mm, requested hand position in the setting state
};
struct ResetCommand {};
struct PauseCommand {};
struct ResumeCommand {};
struct SpeedScaleCommand {
  double scale = 1.0;  // transit speed factor, in [kMinSpeedScale, kMaxSpeedScale]
};
/// Scripted disturbance: a constant force on the end effector. Accepted from
/// scripts only, never from clients.
struct PushCommand {
  Vec2 force = Vec2::Zero();  // N
  double duration = 0.1;      // s
};

using Command = std::variant<ButtonCommand, SetTargetCommand, ResetCommand, PauseCommand, ResumeCommand,
                             SpeedScaleCommand, PushCommand>;

inline constexpr double kMinSpeedScale = 0.1;
inline constexpr double kMaxSpeedScale = 2.0;

/// Wire name of the command ("button", "set_target", ...).
std::string command_name(const Command& c);

/// Parses a command object {"type": ..., ...}. Throws InvalidArgument with a
/// reason on malformed input or unknown types.
Command parse_command(const nlohmann::json& j, bool allow_script_only = false);
nlohmann::json to_json(const Command& c);

/// Snapshot streamed to clients.
struct StateMessage {
  std::uint64_t seq = 0;
  double t = 0.0;
  Vec2 theta = Vec2::Zero();  // rad
  Vec2 phi = Vec2::Zero();    // rad
  Vec2 k = Vec2::Zero();
  PlanarPose ee;              // mm
  Vec2 r = Vec2::Zero();
  Vec2 epsilon_r = Vec2::Zero();
  TaskState task;
  TaskCommands commands;
  std::optional<PlanarPose> hand_target;  // setting state only
  double knife_phase = 0.0;               // [0, 1) while the knife runs
  double speed_scale = 1.0;
  bool paused = false;
  bool detected = false;
  bool armed = false;  // collision detection live
  bool saturated = false;
  bool limit_hit = false;
};

/// Wire form; angles in degrees.
nlohmann::json to_json(const StateMessage& m);

/// Checks a received state message against the published schema; returns
/// the offending field paths.
std::vector<std::string> state_message_violations(const nlohmann::json& j);

nlohmann::json error_reply(const std::string& message, const nlohmann::json& request = nullptr);

/// One row of the session trace.
struct SessionRow {
  double t = 0.0;
  std::string event;  // what happened on this tick, empty for periodic rows
  bool accepted = true;
  TaskState task;
  TaskCommands commands;
  Vec2 theta = Vec2::Zero();
  Vec2 k = Vec2::Zero();
  Vec2 k_target = Vec2::Zero();
  Vec2 tau = Vec2::Zero();  // applied motor torque
  PlanarPose ee;
  Vec2 r = Vec2::Zero();
  bool detected = false;
  bool paused = false;
};

extern const std::vector<std::string> kSessionColumns;
void write_session_csv(std::ostream& out, const std::vector<SessionRow>& rows);

/// The state/stiffness contract on a logged tick: rest -> k_target = k_high,
/// transit -> k_target = k_low, setting -> tau_m = 0. Rows under a collision
/// reaction are exempt.
std::vector<std::string> session_contract_violations(const SessionRow& row, const SimConfig& cfg);

struct Reply {
  std::uint64_t origin = 0;
  nlohmann::json body;
};

class Session {
 public:
  explicit Session(SimConfig cfg);

  /// Queues a command; `origin` routes the reply, a non-null `request_id` is
  /// echoed in it as "id".
  void submit(Command c, std::uint64_t origin = 0, nlohmann::json request_id = nullptr);

  /// One loop iteration: consumes at most one queued command, then advances
  /// the simulation by dt unless paused. Returns true when a state message is
  /// due (every 1 / stream_hz of loop time, paused or not).
  bool tick();

  StateMessage state() const;
  std::vector<Reply> take_replies();
  const std::vector<SessionRow>& trace() const { return trace_; }
  void clear_trace() { trace_.clear(); }

  double time() const { return s_.t; }
  std::uint64_t ticks() const { return ticks_; }
  bool paused() const { return paused_; }
  const TaskState& task() const { return task_; }
  const ArmState& arm_state() const { return s_; }
  std::size_t pending() const { return queue_.size(); }
  const SimConfig& config() const { return cfg_; }
  const std::vector<DetectionEvent>& detections() const { return detections_; }

 private:
  struct Queued {
    Command command;
    std::uint64_t origin;
    nlohmann::json request_id;
  };

  void initialize();
  void handle(const Queued& q);
  void fsm_event(TaskEvent e, std::string* note);
  void enter(const TaskState& next);
  void start_transit();
  void physics();
  void apply_commands();
  void note(std::string event, bool accepted);
  void log_row(const std::string& event, bool accepted);
  PlanarPose ee() const;

  SimConfig cfg_;
  CooperativeRegion region_;
  Threshold threshold_;
  PlanarPose home_ee_;
  std::deque<Queued> queue_;
  std::vector<Reply> replies_;
  std::vector<SessionRow> trace_;
  std::vector<DetectionEvent> detections_;
  std::uint64_t ticks_ = 0;
  std::uint64_t steps_ = 0;  // simulated ticks since the last reset
  std::uint64_t stream_every_ = 20;
  double speed_scale_ = 1.0;
  bool paused_ = false;

  // Simulation state, reinitialized by reset.
  ArmState s_;
  ObserverState obs_;
  PidState pid_;
  TaskState task_;
  TaskCommands commands_;
  std::optional<JointPlan> plan_;
  double plan_start_ = 0.0;
  Vec2 hold_q_ = Vec2::Zero();
  std::optional<PlanarPose> hand_target_;
  std::optional<ReactionOverride> reaction_;
  Vec2 push_force_ = Vec2::Zero();
  double push_until_ = -1.0;
  double knife_since_ = 0.0;
  Vec2 tau_ = Vec2::Zero();
  bool saturated_ = false;
  bool limit_hit_ = false;
  bool armed_ = false;  // detection live in this transit
  std::vector<std::pair<std::string, bool>> tick_events_;
};

/// A command scheduled at loop time t (loop ticks keep counting while paused).
struct ScriptedCommand {
  double t = 0.0;
  Command command;
};

/// {t, button, value} or {t, type, ...}. Throws InvalidArgument.
ScriptedCommand parse_script_entry(const nlohmann::json& j);
/// JSON lines; blank lines and lines starting with '#' are skipped. Errors
/// name the line.
std::vector<ScriptedCommand> read_event_lines(std::istream& in);
std::vector<ScriptedCommand> parse_script(const nlohmann::json& array);

struct BatchResult {
  std::vector<SessionRow> trace;
  nlohmann::json summary;
};

/// Runs a session as fast as possible for `duration` seconds of loop time,
/// issuing each scripted command on the first tick at or after its t.
BatchResult run_batch(const SimConfig& cfg, std::vector<ScriptedCommand> script, double duration);

}  // namespace vsasrl

#endif  // VSASRL_SESSION_HPP
