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

#include "vsasrl/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace vsasrl {

using nlohmann::json;

namespace {

constexpr double kDeg = kPi / 180.0;

// Binds JSON fields to struct members in either direction so reading and
// writing share one schema. `scale` converts file units to internal units.
class Binder {
 public:
  // File values in degrees are written rounded to 1e-9 so that presets stay
  // readable and a read/write cycle is idempotent.
  static double to_file(double v, double scale) {
    if (scale == 1.0) return v;
    return std::round(v / scale * 1e9) / 1e9;
  }

  Binder(json* node, bool writing, std::string path, std::vector<std::string>* errors)
      : node_(node), writing_(writing), path_(std::move(path)), errors_(errors) {
    if (writing_ && !node_->is_object()) *node_ = json::object();
  }

  void num(const char* key, double& v, double scale = 1.0) {
    if (writing_) {
      (*node_)[key] = to_file(v, scale);
      return;
    }
    if (const json* x = find(key)) {
      if (x->is_number()) v = x->get<double>() * scale;
      else error(key, "must be a number");
    }
  }

  void integer(const char* key, int& v) {
    if (writing_) {
      (*node_)[key] = v;
      return;
    }
    if (const json* x = find(key)) {
      if (x->is_number_integer()) v = x->get<int>();
      else error(key, "must be an integer");
    }
  }

  void boolean(const char* key, bool& v) {
    if (writing_) {
      (*node_)[key] = v;
      return;
    }
    if (const json* x = find(key)) {
      if (x->is_boolean()) v = x->get<bool>();
      else error(key, "must be true or false");
    }
  }

  void vec2(const char* key, Vec2& v, double scale = 1.0) {
    if (writing_) {
      (*node_)[key] = {to_file(v(0), scale), to_file(v(1), scale)};
      return;
    }
    if (const json* x = find(key)) {
      if (x->is_array() && x->size() == 2 && (*x)[0].is_number() && (*x)[1].is_number())
        v = Vec2((*x)[0].get<double>(), (*x)[1].get<double>()) * scale;
      else error(key, "must be an array of 2 numbers");
    }
  }

  void pose(const char* key, PlanarPose& p) {
    Vec2 v = p.vec();
    vec2(key, v);
    p = PlanarPose::from(v);
  }

  template <typename T>
  void list(const char* key, std::vector<T>& v) {
    if (writing_) {
      (*node_)[key] = v;
      return;
    }
    if (const json* x = find(key)) {
      bool ok = x->is_array();
      if (ok)
        for (const auto& e : *x) ok = ok && (std::is_integral_v<T> ? e.is_number_integer() : e.is_number());
      if (ok) v = x->get<std::vector<T>>();
      else error(key, std::is_integral_v<T> ? "must be an array of integers" : "must be an array of numbers");
    }
  }

  void range(const char* key, SweepRange& r) {
    if (writing_) {
      (*node_)[key] = {r.min, r.max, r.step};
      return;
    }
    if (const json* x = find(key)) {
      if (x->is_array() && x->size() == 3 && (*x)[0].is_number() && (*x)[1].is_number() && (*x)[2].is_number())
        r = {(*x)[0].get<double>(), (*x)[1].get<double>(), (*x)[2].get<double>()};
      else error(key, "must be [min, max, step]");
    }
  }

  template <typename E>
  void choice(const char* key, E& e, const std::function<std::string(E)>& name,
              const std::function<E(const std::string&)>& parse) {
    if (writing_) {
      (*node_)[key] = name(e);
      return;
    }
    if (const json* x = find(key)) {
      if (!x->is_string()) {
        error(key, "must be a string");
        return;
      }
      try {
        e = parse(x->get<std::string>());
      } catch (const Error& ex) {
        error(key, ex.what());
      }
    }
  }

  void raw(const char* key, json& v) {
    if (writing_) {
      (*node_)[key] = v;
      return;
    }
    if (const json* x = find(key)) v = *x;
  }

  Binder sub(const char* key) {
    if (writing_) return Binder(&(*node_)[key], true, path_ + key + ".", errors_);
    if (const json* x = find(key)) {
      if (x->is_object()) return Binder(const_cast<json*>(x), false, path_ + key + ".", errors_);
      error(key, "must be an object");
    }
    return Binder(&empty_, false, path_ + key + ".", errors_);
  }

  void finish() {
    if (writing_ || !node_->is_object()) return;
    for (const auto& item : node_->items())
      if (!seen_.count(item.key())) errors_->push_back(path_ + item.key() + ": unknown field");
  }

 private:
  const json* find(const char* key) {
    seen_.insert(key);
    if (!node_->is_object()) return nullptr;
    auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }
  void error(const char* key, const std::string& what) { errors_->push_back(path_ + key + ": " + what); }

  json* node_;
  bool writing_;
  std::string path_;
  std::vector<std::string>* errors_;
  std::set<std::string> seen_;
  static inline json empty_ = json::object();
};

std::string elbow_name(Elbow e) { return e == Elbow::Up ? "up" : "down"; }
Elbow elbow_parse(const std::string& s) {
  if (s == "up") return Elbow::Up;
  if (s == "down") return Elbow::Down;
  throw InvalidArgument("unknown elbow '" + s + "', expected up or down");
}
std::string quadrature_name(BetaQuadrature q) { return q == BetaQuadrature::Hermite ? "hermite" : "trapezoid"; }
BetaQuadrature quadrature_parse(const std::string& s) {
  if (s == "hermite") return BetaQuadrature::Hermite;
  if (s == "trapezoid") return BetaQuadrature::Trapezoid;
  throw InvalidArgument("unknown quadrature '" + s + "', expected hermite or trapezoid");
}

void bind(Binder& root, SimConfig& c) {
  root.integer("schema_version", c.schema_version);
  {
    Binder b = root.sub("arm");
    ArmParams& a = c.arm;
    b.vec2("length", a.length);
    b.vec2("mass", a.mass);
    b.vec2("com", a.com);
    b.vec2("inertia", a.inertia);
    b.vec2("motor_inertia", a.motor_inertia);
    b.vec2("link_damping", a.link_damping);
    b.vec2("motor_damping", a.motor_damping);
    b.num("alpha_deg", a.alpha, kDeg);
    b.num("g0", a.g0);
    b.vec2("theta_min_deg", a.theta_min, kDeg);
    b.vec2("theta_max_deg", a.theta_max, kDeg);
    b.num("tau_max", a.tau_max);
    b.num("omega_max_dps", a.omega_max, kDeg);
    b.num("k_min", a.k_min);
    b.num("k_max", a.k_max);
    b.num("t_stiff", a.t_stiff);
    b.num("limit_stiffness", a.limit_stiffness);
    b.num("limit_damping", a.limit_damping);
    b.finish();
  }
  {
    Binder b = root.sub("observer");
    b.vec2("gain", c.observer.gain);
    b.num("epsilon_c", c.observer.epsilon_c);
    b.num("dt", c.observer.dt);
    b.choice<BetaQuadrature>("quadrature", c.observer.quadrature, quadrature_name, quadrature_parse);
    b.vec2("r_hat_max", c.r_hat_max);
    b.finish();
  }
  {
    Binder b = root.sub("gains");
    PidGains& g = c.tracking.gains;
    b.vec2("kp", g.kp);
    b.vec2("ki", g.ki);
    b.vec2("kd", g.kd);
    b.vec2("integral_clamp", g.integral_clamp);
    b.finish();
  }
  {
    Binder b = root.sub("tracking");
    TrackingConfig& t = c.tracking;
    b.vec2("home_deg", t.home, kDeg);
    b.choice<Elbow>("elbow", t.elbow, elbow_name, elbow_parse);
    b.num("t_acc", t.t_acc);
    b.num("t_total", t.t_total);
    b.num("cartesian_cap", t.cartesian_cap);
    b.num("k_high", t.k_high);
    b.num("k_low", t.k_low);
    b.boolean("stiffness_schedule", t.stiffness_schedule);
    b.choice<FeedbackSide>("feedback", t.side, [](FeedbackSide s) { return to_string(s); },
                           feedback_side_from_string);
    b.num("settle", t.settle);
    b.choice<ReactionStrategy>("reaction", t.reaction, [](ReactionStrategy s) { return to_string(s); },
                               reaction_from_string);
    b.pose("target_mm", c.track_target);
    b.finish();
  }
  {
    Binder b = root.sub("workspace");
    WorkspaceSpec& w = c.workspace;
    b.num("A", w.A);
    b.num("B", w.B);
    b.num("C", w.C);
    b.num("D", w.D);
    b.num("E", w.E);
    b.num("main_x_min", c.main_x_min);
    b.num("midline_gap", c.midline_gap);
    b.num("theta1_cap_deg", w.theta1_cap_deg);
    b.num("cell_mm", w.cell_mm);
    b.num("area_step_deg", c.area_step_deg);
    Binder g = b.sub("grid");
    g.range("l1", c.grid.l1);
    g.range("l2", c.grid.l2);
    g.range("theta1_max_deg", c.grid.theta1_max);
    g.range("theta2_max_deg", c.grid.theta2_max);
    g.finish();
    b.finish();
  }
  {
    Binder b = root.sub("task");
    TaskConfig& t = c.task;
    b.pose("dish_center_mm", t.dish_center);
    b.vec2("home_deg", t.home_pose, kDeg);
    b.num("reach_tolerance_mm", t.reach_tolerance_mm);
    b.num("reach_speed_tolerance_dps", t.reach_speed_tolerance, kDeg);
    b.num("knife_period", t.knife_period);
    Binder h = b.sub("homing");
    HomingConfig& hc = c.homing;
    h.num("search_speed_dps", hc.search_speed, kDeg);
    h.vec2("switch_position_deg", hc.switch_position, kDeg);
    h.num("move_speed_dps", hc.move_speed, kDeg);
    h.num("settle", hc.settle);
    h.num("timeout", hc.timeout);
    h.num("stiffness", hc.stiffness);
    h.finish();
    b.finish();
  }
  {
    Binder b = root.sub("medium");
    b.num("k_c", c.medium.k_c);
    b.num("c_c", c.medium.c_c);
    b.num("F_y", c.medium.F_y);
    b.num("c_cut", c.medium.c_cut);
    b.num("depth_limit", c.medium.depth_limit);
    b.finish();
  }
  {
    Binder b = root.sub("stab");
    b.pose("impact_point_mm", c.stab.point);
    b.num("approach_distance", c.stab.approach_distance);
    b.num("accel", c.stab.accel);
    b.num("contact_window", c.stab.contact_window);
    b.list("velocities", c.stab_velocities);
    b.list("cases", c.stab_cases);
    b.finish();
  }
  {
    Binder b = root.sub("calibration");
    b.num("mass_mismatch", c.calibration.mass_mismatch);
    b.boolean("perturb_motor_inertia", c.calibration.perturb_motor_inertia);
    b.list("velocities", c.calibration.velocities);
    b.list("cases", c.calibration.cases);
    b.num("medium_v_intact", c.medium_v_intact);
    b.num("medium_v_cut", c.medium_v_cut);
    b.finish();
  }
  {
    Binder b = root.sub("session");
    b.num("stream_hz", c.session.stream_hz);
    b.num("duration", c.session.duration);
    b.integer("log_every", c.session.log_every);
    b.num("hand_stiffness", c.session.hand_stiffness);
    b.num("hand_damping", c.session.hand_damping);
    b.raw("script", c.session.script);
    b.finish();
  }
  root.finish();
}

}  // namespace

Threshold SimConfig::threshold() const { return {r_hat_max, r_hat_max + Vec2::Constant(observer.epsilon_c)}; }

CooperativeRegion SimConfig::cooperative_region() const {
  LimitBox box{rad2deg(arm.theta_max(0)), rad2deg(arm.theta_max(1)), rad2deg(arm.theta_min(0)),
               rad2deg(arm.theta_min(1))};
  return CooperativeRegion(workspace.cooperative_region, workspace.cell_mm, arm.length(0) * 1e3,
                           arm.length(1) * 1e3, box);
}

std::vector<std::string> violations(const SimConfig& c) {
  std::vector<std::string> out;
  auto add = [&](std::vector<std::string> v) { out.insert(out.end(), v.begin(), v.end()); };
  if (c.schema_version != kSchemaVersion)
    out.push_back("schema_version: unsupported, expected " + std::to_string(kSchemaVersion));
  add(violations(c.arm, "arm"));
  add(violations(c.observer, "observer"));
  if (!(c.r_hat_max.allFinite() && (c.r_hat_max.array() >= 0.0).all()))
    out.push_back("observer.r_hat_max: must be finite and >= 0");
  add(violations(c.tracking, "tracking"));
  if (!(c.tracking.k_low >= c.arm.k_min && c.tracking.k_high <= c.arm.k_max))
    out.push_back("tracking.k_high: stiffness levels must lie in [arm.k_min, arm.k_max]");
  add(violations(c.workspace, "workspace"));
  for (auto [r, name] : {std::pair{&c.grid.l1, "l1"}, {&c.grid.l2, "l2"}, {&c.grid.theta1_max, "theta1_max_deg"},
                         {&c.grid.theta2_max, "theta2_max_deg"}})
    if (!(std::isfinite(r->min) && r->max >= r->min && r->step > 0.0))
      out.push_back(std::string("workspace.grid.") + name + ": need min <= max and step > 0");
  if (!(c.area_step_deg > 0.0)) out.push_back("workspace.area_step_deg: must be > 0");
  if (out.empty()) add(violations(c.task, c.cooperative_region(), "task"));
  if (!JointLimits{c.arm.theta_min, c.arm.theta_max}.contains(c.task.home_pose))
    out.push_back("task.home_deg: must lie within the joint limits");
  if (!(c.homing.search_speed > 0.0 && c.homing.move_speed > 0.0 && c.homing.timeout > 0.0 &&
        c.homing.settle >= 0.0))
    out.push_back("task.homing: speeds and timeout must be > 0, settle >= 0");
  add(violations(c.medium, "medium"));
  add(violations(c.stab, "stab"));
  for (double v : c.stab_velocities)
    if (!(v > 0.0)) out.push_back("stab.velocities: must be > 0");
  for (int k : c.stab_cases)
    if (k < 1 || k > 3) out.push_back("stab.cases: must be 1, 2 or 3");
  if (!(c.calibration.mass_mismatch >= 0.0 && c.calibration.mass_mismatch < 1.0))
    out.push_back("calibration.mass_mismatch: must lie in [0, 1)");
  if (!(c.medium_v_cut > c.medium_v_intact && c.medium_v_intact > 0.0))
    out.push_back("calibration.medium_v_cut: must exceed medium_v_intact > 0");
  if (!(c.session.stream_hz > 0.0 && c.session.stream_hz <= 1.0 / c.observer.dt))
    out.push_back("session.stream_hz: must lie in (0, 1/dt]");
  if (!(c.session.duration > 0.0)) out.push_back("session.duration: must be > 0");
  if (c.session.log_every < 1) out.push_back("session.log_every: must be >= 1");
  if (!(c.session.hand_stiffness >= 0.0 && c.session.hand_damping >= 0.0))
    out.push_back("session.hand_stiffness: hand gains must be >= 0");
  if (!c.session.script.is_array()) out.push_back("session.script: must be an array");
  return out;
}

SimConfig parse_config(const json& j) {
  if (!j.is_object()) throw ValidationError({"<root>: must be a JSON object"});
  SimConfig c;
  std::vector<std::string> errors;
  if (!j.contains("schema_version")) errors.push_back("schema_version: required");
  Binder b(const_cast<json*>(&j), false, "", &errors);
  bind(b, c);
  if (!errors.empty()) throw ValidationError(errors);
  c.workspace.layout(c.main_x_min, c.midline_gap);
  auto v = violations(c);
  if (!v.empty()) throw ValidationError(v);
  return c;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError({path + ": cannot open"});
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError({path + ": " + e.what()});
  }
  return parse_config(j);
}

json to_json(const SimConfig& c) {
  json j = json::object();
  SimConfig copy = c;
  Binder b(&j, true, "", nullptr);
  bind(b, copy);
  return j;
}

}  // namespace vsasrl
