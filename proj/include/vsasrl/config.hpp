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

// Run configuration: every module's parameters in one versioned JSON
// document. Angles are degrees at this boundary and radians inside.

#ifndef VSASRL_CONFIG_HPP
#define VSASRL_CONFIG_HPP

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vsasrl/arm.hpp"
#include "vsasrl/fsm.hpp"
#include "vsasrl/motion.hpp"
#include "vsasrl/observer.hpp"
#include "vsasrl/stab.hpp"
#include "vsasrl/workspace.hpp"

namespace vsasrl {

inline constexpr int kSchemaVersion = 1;

struct SessionSettings {
  double stream_hz = 50.0;
  double duration = 60.0;      // s, batch `simulate` length
  int log_every = 10;          // trace decimation, ticks
  double hand_stiffness = 300.0;  // N/m, operator hand in the setting state
  double hand_damping = 40.0;     // N s/m
  nlohmann::json script = nlohmann::json::array();  // timed commands for `simulate`
};

struct SimConfig {
  int schema_version = kSchemaVersion;
  ArmParams arm;
  ObserverConfig observer;
  Vec2 r_hat_max{1.053, 2.725};  // N m, calibrated collision-free residual bound
  TrackingConfig tracking;
  PlanarPose track_target{-23.62, 650.69};  // mm
  WorkspaceSpec workspace = WorkspaceSpec::defaults();
  double main_x_min = -537.0;  // mm
  double midline_gap = 75.0;   // mm
  OptimizationGrid grid;
  double area_step_deg = 0.2;
  TaskConfig task;
  HomingConfig homing;
  ContactMedium medium;
  StabGeometry stab;
  std::vector<double> stab_velocities{0.2, 0.3, 0.4, 0.48, 0.6, 0.8};
  std::vector<int> stab_cases{1, 2, 3};
  CalibrationSet calibration;
  double medium_v_intact = 0.48;  // m/s
  double medium_v_cut = 0.60;     // m/s
  SessionSettings session;

  /// Collision threshold r_hat_max + epsilon_c.
  Threshold threshold() const;
  /// The task's cooperative region for the configured arm.
  CooperativeRegion cooperative_region() const;
};

/// Every violated invariant, as "section.field: reason".
std::vector<std::string> violations(const SimConfig& c);

/// Parses and validates. Missing sections and fields keep their defaults;
/// unknown keys, wrong types and invariant violations raise ValidationError
/// listing every offending field path.
SimConfig parse_config(const nlohmann::json& j);

/// Reads `path`; throws ValidationError (including for unreadable files and
/// JSON syntax errors, reported against the path).
SimConfig load_config(const std::string& path);

nlohmann::json to_json(const SimConfig& c);

}  // namespace vsasrl

#endif  // VSASRL_CONFIG_HPP
