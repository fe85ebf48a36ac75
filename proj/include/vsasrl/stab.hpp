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

// Simulated stabbing of a soft medium and the collision-free runs used to
// calibrate the observer threshold.
//
// The medium is a compression-only Kelvin-Voigt layer in series with a cut
// front. With blade excursion s past the surface and cut depth d:
//
//   F     = max(0, k_c (s - d) + c_c s_dot)            while s > d, else 0
//   d_dot = max(0, (k_c (s - d) - F_y) / c_cut)        capped at depth_limit
//
// so the blade indents elastically until the elastic force exceeds F_y, and
// only cutting (d > 0) counts as penetration.

#ifndef VSASRL_STAB_HPP
#define VSASRL_STAB_HPP

#include <string>
#include <vector>

#include "vsasrl/arm.hpp"
#include "vsasrl/kinematics.hpp"
#include "vsasrl/motion.hpp"
#include "vsasrl/observer.hpp"
#include "vsasrl/reaction.hpp"

namespace vsasrl {

struct ContactMedium {
  double k_c = 5000.0;       // N/m
  double c_c = 10.0;         // N s/m
  double F_y = 27.5;         // N, from calibrate_medium
  double c_cut = 400.0;      // N s/m
  double depth_limit = 0.04; // m
};

std::vector<std::string> violations(const ContactMedium& m, const std::string& prefix = "medium");

/// Contact force (N, >= 0) for excursion `s` (m) past the surface, its rate
/// `s_dot` (m/s) and cut depth `d` (m).
double contact_force(const ContactMedium& m, double s, double s_dot, double d);

/// Cut depth after `dt` at excursion s.
double advance_cut(const ContactMedium& m, double s, double d, double dt);

/// Straight-line stab approach along -y, ending at a surface through `point`.
struct StabGeometry {
  PlanarPose point{-23.62, 650.69};  // mm, impact point on the surface
  double approach_distance = 0.20;   // m, start above the surface
  double accel = 4.0;                // m/s^2
  double contact_window = 0.40;      // s simulated after first contact
};

std::vector<std::string> violations(const StabGeometry& g, const std::string& prefix = "stab");

struct StabCase {
  int id = 1;
  double stiffness = 70.0;
  ReactionStrategy reaction = ReactionStrategy::ZeroTorque;
};

/// Case 1: low stiffness + zero torque; 2: high + zero torque; 3: high +
/// zero torque with softening. Throws InvalidArgument for other ids.
StabCase stab_case(int id, const ArmParams& p);

struct StabResult {
  int case_id = 0;
  double velocity = 0.0;      // m/s
  double F_p = 0.0;           // N
  double d_p = 0.0;           // mm
  double detected_at = -1.0;  // s, -1 when not detected
  double contact_at = -1.0;   // s, -1 when never in contact
  double peak_force_at = -1.0;
  double tau_after_detection = 0.0;  // max |tau_m| after detection, N m
};

struct StabTrace {
  std::vector<double> t, force, cut, k2, tau2, r2;
};

/// Runs one stab. `plant` is simulated, `model` drives the observer.
StabResult run_stab_scenario(int case_id, double velocity, const ArmParams& plant,
                             const ArmParams& model, const ObserverConfig& obs_cfg,
                             const Threshold& threshold, const ContactMedium& medium,
                             const StabGeometry& geom, const PidGains& gains,
                             StabTrace* trace = nullptr);

/// Cross product of cases and velocities, ordered by case then velocity.
std::vector<StabResult> sweep(const std::vector<double>& velocities, const std::vector<int>& cases,
                              const ArmParams& plant, const ObserverConfig& obs_cfg,
                              const Threshold& threshold, const ContactMedium& medium,
                              const StabGeometry& geom, const PidGains& gains);

/// Residual trace of the collision-free version of a stab approach: same
/// reference, decelerating to rest at the surface, no medium.
std::vector<Vec2> approach_residuals(int case_id, double velocity, const ArmParams& plant,
                                     const ArmParams& model, const ObserverConfig& obs_cfg,
                                     const StabGeometry& geom, const PidGains& gains);

struct CalibrationSet {
  std::vector<double> velocities{0.2, 0.3, 0.4, 0.48, 0.6, 0.8};
  std::vector<int> cases{1, 2, 3};
  double mass_mismatch = 0.10;  // relative, applied with every sign pattern
  bool perturb_motor_inertia = true;  // scale J with the link of the same joint
};

struct CalibrationReport {
  Threshold threshold;
  std::size_t runs = 0;
  Vec2 worst_tracking = Vec2::Zero();  // max |r| over the tracking runs
  Vec2 worst_approach = Vec2::Zero();  // max |r| over the approach runs
};

/// Collision-free runs (tracking plus every stab approach) on plants whose
/// link masses and inertias (and optionally reflected motor inertias) are off
/// by +-mass_mismatch, observed with the nominal model; returns the threshold
/// of calibrate_threshold.
CalibrationReport calibrate_with_mismatch(const ArmParams& nominal, const ObserverConfig& obs_cfg,
                                          const TrackingConfig& tracking, const PlanarPose& target,
                                          const StabGeometry& geom, const CalibrationSet& set);

/// Bracket of F_y consistent with the medium calibration targets: case
/// `case_id` does not cut at `v_intact` and does cut at `v_cut`.
struct MediumCalibration {
  ContactMedium medium;  // F_y at the bracket midpoint
  double F_y_low = 0.0;   // smallest F_y leaving the v_intact stab uncut
  double F_y_high = 0.0;  // largest F_y still cut at v_cut
};

/// Bisects F_y (all other medium fields from `base`) to `tol` N. Throws
/// InfeasibleError when the bracket is empty.
MediumCalibration calibrate_medium(const ContactMedium& base, const ArmParams& plant,
                                   const ObserverConfig& obs_cfg, const Threshold& threshold,
                                   const StabGeometry& geom, const PidGains& gains,
                                   double v_intact = 0.48, double v_cut = 0.60, int case_id = 1,
                                   double tol = 0.05);

}  // namespace vsasrl

#endif  // VSASRL_STAB_HPP
