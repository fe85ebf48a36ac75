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

#include "vsasrl/arm.hpp"

#include <sstream>

namespace vsasrl {

namespace {

std::string join_messages(const std::vector<std::string>& v) {
  std::ostringstream os;
  os << "invalid configuration:";
  for (const auto& s : v) os << "\n  " << s;
  return os.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(join_messages(violations)), violations_(std::move(violations)) {}

std::vector<std::string> violations(const ArmParams& p, const std::string& prefix) {
  std::vector<std::string> out;
  auto require = [&](bool ok, const std::string& field, const char* what) {
    if (!ok) out.push_back(prefix + "." + field + ": " + what);
  };
  auto positive2 = [&](const Vec2& v, const std::string& field) {
    require(v.allFinite() && (v.array() > 0.0).all(), field, "must be finite and > 0");
  };
  auto nonneg2 = [&](const Vec2& v, const std::string& field) {
    require(v.allFinite() && (v.array() >= 0.0).all(), field, "must be finite and >= 0");
  };
  positive2(p.length, "length");
  positive2(p.mass, "mass");
  positive2(p.com, "com");
  positive2(p.inertia, "inertia");
  positive2(p.motor_inertia, "motor_inertia");
  nonneg2(p.link_damping, "link_damping");
  nonneg2(p.motor_damping, "motor_damping");
  require((p.com.array() <= p.length.array()).all(), "com", "must not exceed link length");
  require(std::isfinite(p.alpha), "alpha", "must be finite");
  require(std::isfinite(p.g0) && p.g0 >= 0.0, "g0", "must be finite and >= 0");
  require(p.theta_min.allFinite() && p.theta_max.allFinite() &&
              (p.theta_min.array() < p.theta_max.array()).all(),
          "theta_max", "must exceed theta_min");
  require(std::isfinite(p.tau_max) && p.tau_max > 0.0, "tau_max", "must be > 0");
  require(std::isfinite(p.omega_max) && p.omega_max > 0.0, "omega_max", "must be > 0");
  require(std::isfinite(p.k_min) && p.k_min > 0.0, "k_min", "must be > 0");
  require(std::isfinite(p.k_max) && p.k_min < p.k_max, "k_max", "must exceed k_min");
  require(std::isfinite(p.t_stiff) && p.t_stiff > 0.0, "t_stiff", "must be > 0");
  require(std::isfinite(p.limit_stiffness) && p.limit_stiffness >= 0.0, "limit_stiffness",
          "must be >= 0");
  require(std::isfinite(p.limit_damping) && p.limit_damping >= 0.0, "limit_damping",
          "must be >= 0");
  return out;
}

void validate(const ArmParams& p) {
  auto v = violations(p);
  if (!v.empty()) throw ValidationError(std::move(v));
}

bool ArmState::finite() const {
  return theta.allFinite() && theta_dot.allFinite() && phi.allFinite() && phi_dot.allFinite() &&
         k.allFinite() && k_target.allFinite() && std::isfinite(t);
}

ArmState rest_state(const Vec2& theta, double k) {
  ArmState s;
  s.theta = theta;
  s.phi = theta;
  s.k = Vec2::Constant(k);
  s.k_target = s.k;
  return s;
}

ArmParams with_mass_scale(const ArmParams& p, const Vec2& scale) {
  ArmParams q = p;
  q.mass = p.mass.cwiseProduct(scale);
  q.inertia = p.inertia.cwiseProduct(scale);
  return q;
}

}  // namespace vsasrl
