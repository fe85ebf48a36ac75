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

#include "vsasrl/session.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <spdlog/spdlog.h>

#include "vsasrl/io.hpp"

namespace vsasrl {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json pair(double a, double b) { return json::array({a, b}); }
json vec_json(const Vec2& v) { return pair(v(0), v(1)); }
json deg_json(const Vec2& v) { return pair(rad2deg(v(0)), rad2deg(v(1))); }
json pose_json(const PlanarPose& p) { return pair(p.x, p.y); }

double finite_number(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw InvalidArgument(std::string("missing field '") + key + "'");
  if (!it->is_number() || !std::isfinite(it->get<double>()))
    throw InvalidArgument(std::string("field '") + key + "' must be a finite number");
  return it->get<double>();
}

void only_fields(const json& j, std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    if (item.key() == "type" || item.key() == "id") continue;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return item.key() == a; }))
      throw InvalidArgument("unknown field '" + item.key() + "'");
  }
}

bool button_value(const std::string& id, const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer() && (v.get<int>() == 0 || v.get<int>() == 1)) return v.get<int>() == 1;
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (id == "B3") {
      if (s == "pressed") return true;
      if (s == "released") return false;
      throw InvalidArgument("B3 value must be pressed or released");
    }
    if (s == "on") return true;
    if (s == "off") return false;
    throw InvalidArgument(id + " value must be on or off");
  }
  throw InvalidArgument("button value must be a boolean, 0/1 or a state name");
}

const char* bool_cell(bool b) { return b ? "1" : "0"; }

}  // namespace

std::string command_name(const Command& c) {
  return std::visit(Overloaded{[](const ButtonCommand&) { return "button"; },
                               [](const SetTargetCommand&) { return "set_target"; },
                               [](const ResetCommand&) { return "reset"; },
                               [](const PauseCommand&) { return "pause"; },
                               [](const ResumeCommand&) { return "resume"; },
                               [](const SpeedScaleCommand&) { return "set_speed_scale"; },
                               [](const PushCommand&) { return "push"; }},
                    c);
}

Command parse_command(const json& j, bool allow_script_only) {
  if (!j.is_object()) throw InvalidArgument("command must be a JSON object");
  auto type_it = j.find("type");
  if (type_it == j.end() || !type_it->is_string()) throw InvalidArgument("missing string field 'type'");
  const std::string type = type_it->get<std::string>();
  if (type == "button") {
    only_fields(j, {"button", "value"});
    auto id = j.find("button");
    if (id == j.end() || !id->is_string()) throw InvalidArgument("missing string field 'button'");
    const auto name = id->get<std::string>();
    if (name != "B1" && name != "B2" && name != "B3") throw InvalidArgument("button must be B1, B2 or B3");
    if (!j.contains("value")) throw InvalidArgument("missing field 'value'");
    return ButtonCommand{name, button_value(name, j["value"])};
  }
  if (type == "set_target") {
    only_fields(j, {"x_mm", "y_mm"});
    return SetTargetCommand{{finite_number(j, "x_mm"), finite_number(j, "y_mm")}};
  }
  if (type == "reset" || type == "pause" || type == "resume") {
    only_fields(j, {});
    if (type == "reset") return ResetCommand{};
    if (type == "pause") return PauseCommand{};
    return ResumeCommand{};
  }
  if (type == "set_speed_scale") {
    only_fields(j, {"scale"});
    const double s = finite_number(j, "scale");
    if (s < kMinSpeedScale || s > kMaxSpeedScale)
      throw InvalidArgument("scale must lie in [" + format_number(kMinSpeedScale) + ", " +
                            format_number(kMaxSpeedScale) + "]");
    return SpeedScaleCommand{s};
  }
  if (type == "push" && allow_script_only) {
    only_fields(j, {"force_N", "duration_s"});
    auto f = j.find("force_N");
    if (f == j.end() || !f->is_array() || f->size() != 2 || !(*f)[0].is_number() || !(*f)[1].is_number())
      throw InvalidArgument("force_N must be [fx, fy]");
    const double d = finite_number(j, "duration_s");
    if (!(d > 0.0)) throw InvalidArgument("duration_s must be > 0");
    return PushCommand{Vec2((*f)[0].get<double>(), (*f)[1].get<double>()), d};
  }
  throw InvalidArgument("unknown command type '" + type + "'");
}

json to_json(const Command& c) {
  return std::visit(
      Overloaded{[](const ButtonCommand& b) -> json { return {{"type", "button"}, {"button", b.id}, {"value", b.value}}; },
                 [](const SetTargetCommand& s) -> json {
                   return {{"type", "set_target"}, {"x_mm", s.target.x}, {"y_mm", s.target.y}};
                 },
                 [](const ResetCommand&) -> json { return {{"type", "reset"}}; },
                 [](const PauseCommand&) -> json { return {{"type", "pause"}}; },
                 [](const ResumeCommand&) -> json { return {{"type", "resume"}}; },
                 [](const SpeedScaleCommand& s) -> json { return {{"type", "set_speed_scale"}, {"scale", s.scale}}; },
                 [](const PushCommand& p) -> json {
                   return {{"type", "push"}, {"force_N", vec_json(p.force)}, {"duration_s", p.duration}};
                 }},
      c);
}

json to_json(const StateMessage& m) {
  return {{"type", "state"},
          {"seq", m.seq},
          {"t", m.t},
          {"theta_deg", deg_json(m.theta)},
          {"phi_deg", deg_json(m.phi)},
          {"k", vec_json(m.k)},
          {"ee_mm", pose_json(m.ee)},
          {"r", vec_json(m.r)},
          {"epsilon_r", vec_json(m.epsilon_r)},
          {"fsm_state", to_string(m.task.mode)},
          {"in_transit", m.task.in_transit},
          {"faulted", m.task.faulted},
          {"knife", m.task.knife},
          {"knife_phase", m.knife_phase},
          {"target_mm", pose_json(m.task.target)},
          {"dish_mm", pose_json(m.task.dish_target)},
          {"hand_target_mm", m.hand_target ? pose_json(*m.hand_target) : json(nullptr)},
          {"stiffness", to_string(m.commands.stiffness)},
          {"torque", to_string(m.commands.torque)},
          {"speed_scale", m.speed_scale},
          {"paused", m.paused},
          {"flags", {{"detected", m.detected}, {"armed", m.armed}, {"saturated", m.saturated}, {"limit_hit", m.limit_hit}}}};
}

std::vector<std::string> state_message_violations(const json& j) {
  std::vector<std::string> out;
  if (!j.is_object()) return {"<root>: must be an object"};
  auto number = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number()) out.push_back(std::string(key) + ": must be a number");
  };
  auto pair_of = [&](const char* key, bool nullable = false) {
    if (nullable && j.contains(key) && j[key].is_null()) return;
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2 || !j[key][0].is_number() ||
        !j[key][1].is_number())
      out.push_back(std::string(key) + ": must be [number, number]");
  };
  auto boolean = [&](const json& o, const std::string& path, const char* key) {
    if (!o.contains(key) || !o[key].is_boolean()) out.push_back(path + key + ": must be a boolean");
  };
  if (j.value("type", "") != "state") out.push_back("type: must be \"state\"");
  if (!j.contains("seq") || !j["seq"].is_number_unsigned()) out.push_back("seq: must be a non-negative integer");
  for (const char* k : {"t", "knife_phase", "speed_scale"}) number(k);
  for (const char* k : {"theta_deg", "phi_deg", "k", "ee_mm", "r", "epsilon_r", "target_mm", "dish_mm"}) pair_of(k);
  pair_of("hand_target_mm", true);
  const std::string mode = j.contains("fsm_state") && j["fsm_state"].is_string() ? j["fsm_state"].get<std::string>() : "";
  if (mode != "S1" && mode != "S2" && mode != "S3" && mode != "S4") out.push_back("fsm_state: must be S1..S4");
  for (const char* k : {"in_transit", "faulted", "knife", "paused"}) boolean(j, "", k);
  if (j.value("stiffness", "") != "high" && j.value("stiffness", "") != "low")
    out.push_back("stiffness: must be high or low");
  if (j.value("torque", "") != "position" && j.value("torque", "") != "zero")
    out.push_back("torque: must be position or zero");
  if (!j.contains("flags") || !j["flags"].is_object()) {
    out.push_back("flags: must be an object");
  } else {
    for (const char* k : {"detected", "armed", "saturated", "limit_hit"}) boolean(j["flags"], "flags.", k);
  }
  return out;
}

json error_reply(const std::string& message, const json& request) {
  json r = {{"type", "error"}, {"message", message}};
  if (!request.is_null()) r["request"] = request;
  return r;
}

const std::vector<std::string> kSessionColumns{
    "t",         "event",    "accepted",   "state",       "in_transit",  "knife",   "faulted",
    "reaction",  "stiffness", "torque",    "target_x_mm", "target_y_mm", "theta1",  "theta2",
    "k1",        "k2",       "k_target1",  "k_target2",   "tau1",        "tau2",    "x_mm",
    "y_mm",      "r1",       "r2",         "detected",    "paused"};

void write_session_csv(std::ostream& out, const std::vector<SessionRow>& rows) {
  for (std::size_t i = 0; i < kSessionColumns.size(); ++i) out << (i ? "," : "") << kSessionColumns[i];
  out << '\n';
  const auto n = [](double v) { return format_number(v); };
  for (const auto& r : rows) {
    out << n(r.t) << ',' << r.event << ',' << bool_cell(r.accepted) << ',' << to_string(r.task.mode) << ','
        << bool_cell(r.task.in_transit) << ',' << bool_cell(r.task.knife) << ',' << bool_cell(r.task.faulted)
        << ',' << bool_cell(r.commands.reaction) << ',' << to_string(r.commands.stiffness) << ','
        << to_string(r.commands.torque) << ',' << n(r.task.target.x) << ',' << n(r.task.target.y) << ','
        << n(r.theta(0)) << ',' << n(r.theta(1)) << ',' << n(r.k(0)) << ',' << n(r.k(1)) << ','
        << n(r.k_target(0)) << ',' << n(r.k_target(1)) << ',' << n(r.tau(0)) << ',' << n(r.tau(1)) << ','
        << n(r.ee.x) << ',' << n(r.ee.y) << ',' << n(r.r(0)) << ',' << n(r.r(1)) << ',' << bool_cell(r.detected)
        << ',' << bool_cell(r.paused) << '\n';
  }
}

std::vector<std::string> session_contract_violations(const SessionRow& row, const SimConfig& cfg) {
  std::vector<std::string> out;
  if (row.task.faulted || row.commands.reaction) return out;
  const std::string at = "t=" + format_number(row.t) + ": ";
  if (row.task.in_transit) {
    if ((row.k_target.array() != cfg.tracking.k_low).any()) out.push_back(at + "transit without low stiffness");
  } else if (row.task.mode == TaskMode::Setting) {
    if ((row.tau.array() != 0.0).any()) out.push_back(at + "setting state with non-zero motor torque");
  } else if ((row.k_target.array() != cfg.tracking.k_high).any()) {
    out.push_back(at + "rest without high stiffness");
  }
  for (const auto& v : contract_violations(row.task, row.commands)) out.push_back(at + v);
  return out;
}

Session::Session(SimConfig cfg)
    : cfg_(std::move(cfg)), region_(cfg_.cooperative_region()), threshold_(cfg_.threshold()) {
  home_ee_ = forward_kinematics(cfg_.arm.length(0) * 1e3, cfg_.arm.length(1) * 1e3, cfg_.task.home_pose);
  stream_every_ = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::llround(1.0 / (cfg_.session.stream_hz * cfg_.observer.dt))));
  initialize();
}

void Session::initialize() {
  const double t = s_.t;
  TrackingConfig tc = cfg_.tracking;
  tc.home = cfg_.task.home_pose;
  s_ = tracking_start(cfg_.arm, tc);
  s_.t = t;
  obs_ = with_threshold(observer_init(cfg_.observer, cfg_.arm, s_), threshold_);
  pid_ = {};
  task_ = initial_task_state(cfg_.task, region_, home_ee_);
  plan_.reset();
  hold_q_ = cfg_.task.home_pose;
  hand_target_.reset();
  reaction_.reset();
  push_until_ = -1.0;
  push_force_.setZero();
  tau_.setZero();
  saturated_ = limit_hit_ = false;
  steps_ = 0;
  speed_scale_ = 1.0;
  apply_commands();
}

PlanarPose Session::ee() const {
  return forward_kinematics(cfg_.arm.length(0) * 1e3, cfg_.arm.length(1) * 1e3, s_.theta);
}

void Session::submit(Command c, std::uint64_t origin, json request_id) {
  queue_.push_back({std::move(c), origin, std::move(request_id)});
}

std::vector<Reply> Session::take_replies() { return std::exchange(replies_, {}); }

void Session::note(std::string event, bool accepted) { tick_events_.emplace_back(std::move(event), accepted); }

void Session::apply_commands() {
  commands_ = commands_for(task_, home_ee_);
  if (reaction_) {
    if (reaction_->k_target) s_.k_target = *reaction_->k_target;
    return;
  }
  const double k = commands_.stiffness == StiffnessLevel::High ? cfg_.tracking.k_high : cfg_.tracking.k_low;
  s_.k_target = Vec2::Constant(k);
}

void Session::fsm_event(TaskEvent e, std::string* why) {
  const FsmStep st = fsm_step(task_, e, region_, ee(), home_ee_);
  note(to_string(e), st.accepted);
  if (!st.accepted) {
    spdlog::warn("t={:.3f}: {} ignored in {}{}: {}", s_.t, to_string(e), to_string(task_.mode),
                 task_.in_transit ? " (transit)" : "", st.note);
    if (why) *why = st.note;
    return;
  }
  enter(st.state);
}

void Session::enter(const TaskState& next) {
  const TaskState prev = std::exchange(task_, next);
  if (task_.faulted && !prev.faulted) {
    reaction_ = apply_reaction(cfg_.tracking.reaction, cfg_.arm, s_);
    plan_.reset();
  }
  if (!task_.faulted) reaction_.reset();
  if (task_.mode == TaskMode::Setting && prev.mode != TaskMode::Setting) hand_target_ = ee();
  if (task_.mode != TaskMode::Setting) hand_target_.reset();
  if (task_.in_transit && (!prev.in_transit || !(task_.target == prev.target))) start_transit();
  if (prev.in_transit && !task_.in_transit && plan_) {
    hold_q_ = sample(*plan_, duration(*plan_)).q;
    plan_.reset();
  }
  if (task_.knife && !prev.knife) knife_since_ = s_.t;
  apply_commands();
}

void Session::start_transit() {
  const ArmParams& a = cfg_.arm;
  const JointLimits limits{a.theta_min, a.theta_max};
  const Vec2 q0 = s_.theta.cwiseMax(a.theta_min).cwiseMin(a.theta_max);
  const Vec2 qf = inverse_kinematics(a.length(0) * 1e3, a.length(1) * 1e3, task_.target, cfg_.tracking.elbow, limits);
  const JointPlan raw = plan_joint_move(q0, qf, cfg_.tracking.t_acc / speed_scale_,
                                       cfg_.tracking.t_total / speed_scale_, limits);
  plan_ = cap_cartesian_speed(raw, a.length(0), a.length(1), cfg_.tracking.cartesian_cap).plan;
  plan_start_ = s_.t;
  pid_ = {};
  reset_detection(obs_);
  armed_ = false;
}

void Session::handle(const Queued& q) {
  auto ack = [&](json extra = json::object()) {
    extra["type"] = "ack";
    extra["command"] = command_name(q.command);
    if (!q.request_id.is_null()) extra["id"] = q.request_id;
    replies_.push_back({q.origin, std::move(extra)});
  };
  auto reject = [&](const std::string& why) {
    note(command_name(q.command), false);
    json request = to_json(q.command);
    if (!q.request_id.is_null()) request["id"] = q.request_id;
    json r = error_reply(why, request);
    if (!q.request_id.is_null()) r["id"] = q.request_id;
    replies_.push_back({q.origin, std::move(r)});
  };
  std::visit(Overloaded{
                 [&](const ButtonCommand& b) {
                   std::string why;
                   fsm_event(button_event(b.id, b.value), &why);
                   json r = {{"accepted", why.empty()}, {"fsm_state", to_string(task_.mode)}};
                   if (!why.empty()) r["note"] = why;
                   ack(r);
                 },
                 [&](const SetTargetCommand& c) {
                   if (task_.mode != TaskMode::Setting || task_.faulted) {
                     reject("set_target is only accepted in the setting state (S3)");
                     return;
                   }
                   hand_target_ = region_.clamp(c.target);
                   note("set_target", true);
                   ack({{"requested_mm", pose_json(c.target)}, {"clamped_mm", pose_json(*hand_target_)}});
                 },
                 [&](const ResetCommand&) {
                   initialize();
                   note("reset", true);
                   ack();
                 },
                 [&](const PauseCommand&) {
                   paused_ = true;
                   note("pause", true);
                   ack();
                 },
                 [&](const ResumeCommand&) {
                   paused_ = false;
                   note("resume", true);
                   ack();
                 },
                 [&](const SpeedScaleCommand& c) {
                   speed_scale_ = c.scale;
                   note("set_speed_scale", true);
                   ack({{"scale", c.scale}});
                 },
                 [&](const PushCommand& c) {
                   push_force_ = c.force;
                   push_until_ = s_.t + c.duration;
                   note("push", true);
                   ack();
                 }},
             q.command);
}

void Session::physics() {
  const ArmParams& a = cfg_.arm;
  const double dt = cfg_.observer.dt;
  Vec2 tau = Vec2::Zero();
  if (reaction_) {
    tau = reaction_->tau_m;
  } else if (commands_.torque == TorqueMode::Position) {
    JointSample ref;
    if (plan_) ref = sample(*plan_, s_.t - plan_start_);
    else ref.q = hold_q_;
    const Vec2 ff = gravity_torque<double>(a, ref.q);
    if (cfg_.tracking.side == FeedbackSide::Motor) {
      const Vec2 phi_d = motor_setpoint(a, ref.q, s_.k);
      tau = pid_step(cfg_.tracking.gains, pid_, phi_d, ref.qd, s_.phi, s_.phi_dot, dt, a.tau_max) + ff;
    } else {
      tau = pid_step(cfg_.tracking.gains, pid_, ref.q, ref.qd, s_.theta, s_.phi_dot, dt, a.tau_max) + ff;
    }
  }

  // Operator hand (setting state) and scripted pushes act on the end effector.
  const bool hand = task_.mode == TaskMode::Setting && hand_target_ && !task_.faulted;
  const bool push = s_.t < push_until_;
  const Vec2 hand_m = hand ? Vec2(hand_target_->vec() * 1e-3) : Vec2::Zero();
  const ExternalTorque ext = [&](const ArmState& st) -> Vec2 {
    if (!hand && !push) return Vec2::Zero();
    const Mat2 j = jacobian<double>(a.length, st.theta);
    Vec2 f = Vec2::Zero();
    if (hand) {
      const Vec2 p = forward_kinematics<double>(a.length, st.theta);
      f += cfg_.session.hand_stiffness * (hand_m - p) - cfg_.session.hand_damping * (j * st.theta_dot);
    }
    if (push) f += push_force_;
    return j.transpose() * f;
  };
  const StepOutcome out = integrate(a, s_, tau, ext, dt);
  s_ = out.state;
  tau_ = out.tau_applied;
  saturated_ = out.saturated;
  limit_hit_ = out.limit_hit;
  obs_ = observer_step(cfg_.observer, obs_, a, s_, out.tau_applied);
  ++steps_;

  if (!task_.in_transit || task_.faulted) return;
  // A transit may start against a standing contact (an end stop after a
  // fault); detection arms once the residual has dropped below threshold.
  if (!armed_) armed_ = (obs_.r.cwiseAbs().array() < obs_.epsilon_r.array()).all();
  if (armed_) {
    if (auto ev = detect(obs_)) {
      detections_.push_back(*ev);
      fsm_event(TaskEvent::Collision, nullptr);
      return;
    }
  }
  if (plan_ && s_.t - plan_start_ + 1e-9 >= duration(*plan_)) {
    const PlanarPose p = ee();
    const bool near = std::hypot(p.x - task_.target.x, p.y - task_.target.y) <= cfg_.task.reach_tolerance_mm;
    const bool still = s_.theta_dot.cwiseAbs().maxCoeff() < cfg_.task.reach_speed_tolerance;
    if (near && still) fsm_event(TaskEvent::Reached, nullptr);
  }
}

void Session::log_row(const std::string& event, bool accepted) {
  SessionRow r;
  r.t = s_.t;
  r.event = event;
  r.accepted = accepted;
  r.task = task_;
  r.commands = commands_;
  r.theta = s_.theta;
  r.k = s_.k;
  r.k_target = s_.k_target;
  r.tau = tau_;
  r.ee = ee();
  r.r = obs_.r;
  r.detected = obs_.event.has_value();
  r.paused = paused_;
  trace_.push_back(std::move(r));
}

bool Session::tick() {
  ++ticks_;
  if (!queue_.empty()) {
    const Queued q = std::move(queue_.front());
    queue_.pop_front();
    handle(q);
  }
  const bool stepped = !paused_;
  if (stepped) physics();
  for (const auto& [event, accepted] : tick_events_) log_row(event, accepted);
  if (tick_events_.empty() && stepped && steps_ % static_cast<std::uint64_t>(cfg_.session.log_every) == 0)
    log_row("", true);
  tick_events_.clear();
  return ticks_ % stream_every_ == 0;
}

StateMessage Session::state() const {
  StateMessage m;
  m.seq = ticks_;
  m.t = s_.t;
  m.theta = s_.theta;
  m.phi = s_.phi;
  m.k = s_.k;
  m.ee = ee();
  m.r = obs_.r;
  m.epsilon_r = obs_.epsilon_r;
  m.task = task_;
  m.commands = commands_;
  m.hand_target = hand_target_;
  m.knife_phase = task_.knife ? std::fmod((s_.t - knife_since_) / cfg_.task.knife_period, 1.0) : 0.0;
  m.speed_scale = speed_scale_;
  m.paused = paused_;
  m.detected = obs_.event.has_value();
  m.armed = armed_ && task_.in_transit && !task_.faulted;
  m.saturated = saturated_;
  m.limit_hit = limit_hit_;
  return m;
}

ScriptedCommand parse_script_entry(const json& j) {
  if (!j.is_object()) throw InvalidArgument("script entry must be an object");
  const double t = finite_number(j, "t");
  if (t < 0.0) throw InvalidArgument("t must be >= 0");
  json body = j;
  body.erase("t");
  if (!body.contains("type") && body.contains("button")) body["type"] = "button";
  return {t, parse_command(body, true)};
}

std::vector<ScriptedCommand> read_event_lines(std::istream& in) {
  std::vector<ScriptedCommand> out;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      out.push_back(parse_script_entry(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw InvalidArgument("events line " + std::to_string(n) + ": " + e.what());
    } catch (const Error& e) {
      throw InvalidArgument("events line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ScriptedCommand> parse_script(const json& array) {
  if (!array.is_array()) throw InvalidArgument("script must be an array");
  std::vector<ScriptedCommand> out;
  for (std::size_t i = 0; i < array.size(); ++i) {
    try {
      out.push_back(parse_script_entry(array[i]));
    } catch (const Error& e) {
      throw InvalidArgument("script[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return out;
}

BatchResult run_batch(const SimConfig& cfg, std::vector<ScriptedCommand> script, double duration) {
  std::stable_sort(script.begin(), script.end(),
                   [](const ScriptedCommand& a, const ScriptedCommand& b) { return a.t < b.t; });
  Session session(cfg);
  const double dt = cfg.observer.dt;
  const auto n = static_cast<std::uint64_t>(std::llround(duration / dt));
  std::size_t next = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double loop_t = static_cast<double>(i) * dt;
    while (next < script.size() && script[next].t <= loop_t + 1e-9) session.submit(script[next++].command);
    session.tick();
  }

  BatchResult res;
  res.trace = session.trace();
  std::size_t accepted = 0, ignored = 0, contract = 0;
  for (const auto& r : res.trace) {
    if (!r.event.empty()) (r.accepted ? accepted : ignored)++;
    contract += session_contract_violations(r, cfg).size();
  }
  json detections = json::array();
  for (const auto& d : session.detections())
    detections.push_back({{"t", d.time}, {"joint", d.joint + 1}, {"r", d.residual_value}});
  res.summary = {{"duration_s", duration},
                 {"sim_time_s", session.time()},
                 {"ticks", session.ticks()},
                 {"commands_issued", next},
                 {"commands_pending", session.pending()},
                 {"events_accepted", accepted},
                 {"events_ignored", ignored},
                 {"contract_violations", contract},
                 {"detections", detections},
                 {"final_state", to_json(session.state())}};
  return res;
}

}  // namespace vsasrl
