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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "vsasrl/dynamics.hpp"
#include "vsasrl/stab.hpp"

namespace vsasrl {
namespace {

TEST(Reaction, StringRoundTrip) {
  for (auto s : {ReactionStrategy::ZeroTorque, ReactionStrategy::ZeroTorquePlusSoften})
    EXPECT_EQ(reaction_from_string(to_string(s)), s);
  EXPECT_THROW(reaction_from_string("freeze"), InvalidArgument);
}

TEST(Reaction, ZeroTorqueHoldsStiffness) {
  const ArmParams p;
  const ArmState s = rest_state(Vec2(0.5, 1.2), 8000.0);
  const auto o = apply_reaction(ReactionStrategy::ZeroTorque, p, s);
  EXPECT_TRUE(o.tau_m.isZero(0.0));
  ASSERT_TRUE(o.k_target.has_value());
  EXPECT_EQ(*o.k_target, Vec2(8000.0, 8000.0));
}

TEST(Reaction, SoftenReachesMinimumAfterRamp) {
  const ArmParams p;
  ArmState s = rest_state(Vec2(0.5, 1.2), 8000.0);
  const auto o = apply_reaction(ReactionStrategy::ZeroTorquePlusSoften, p, s);
  ASSERT_TRUE(o.k_target.has_value());
  s.k_target = *o.k_target;
  const double dt = 1e-3;
  double reached = -1.0, prev = s.k(0);
  for (int i = 1; i <= 1000 && reached < 0.0; ++i) {
    s = step(p, s, o.tau_m, Vec2::Zero(), dt);
    EXPECT_LE(s.k(0), prev);
    prev = s.k(0);
    if (s.k(0) == p.k_min) reached = i * dt;
    // Still stiff well after a 60 ms impact.
    if (i == 60) EXPECT_GT(s.k(0), 6900.0);
  }
  EXPECT_NEAR(reached, 0.450, dt + 1e-9);
}

TEST(Reaction, AtRestStaysAtRest) {
  const ArmParams p;
  for (auto strat : {ReactionStrategy::ZeroTorque, ReactionStrategy::ZeroTorquePlusSoften}) {
    ArmState s = rest_state(Vec2(0.5, 1.2), 8000.0);
    const auto o = apply_reaction(strat, p, s);
    s.k_target = *o.k_target;
    for (int i = 0; i < 1000; ++i) s = step(p, s, o.tau_m, Vec2::Zero(), 1e-3);
    EXPECT_TRUE(s.theta.isApprox(Vec2(0.5, 1.2), 1e-15));
    EXPECT_TRUE((s.theta - s.phi).isZero(1e-15));
    EXPECT_TRUE(s.theta_dot.isZero(1e-15));
  }
}

TEST(Medium, ForceOutsideAndStatic) {
  const ContactMedium m;
  EXPECT_EQ(contact_force(m, -0.01, -0.5, 0.0), 0.0);
  EXPECT_EQ(contact_force(m, 0.0, 0.5, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(contact_force(m, 0.001, 0.0, 0.0), 5.0);
  // 5 N < F_y: indentation without cutting.
  double d = 0.0;
  for (int i = 0; i < 1000; ++i) d = advance_cut(m, 0.001, d, 1e-3);
  EXPECT_EQ(d, 0.0);
  // Compression only.
  EXPECT_EQ(contact_force(m, 0.001, -1.0, 0.0), 0.0);
  EXPECT_THROW(contact_force(m, NAN, 0.0, 0.0), NonFiniteError);
}

TEST(Medium, CutAdvancesAboveYield) {
  ContactMedium m;
  const double s = 0.01;  // 50 N elastic
  EXPECT_NEAR(advance_cut(m, s, 0.0, 1e-3), (50.0 - m.F_y) / m.c_cut * 1e-3, 1e-15);
  double d = 0.0;
  for (int i = 0; i < 100000; ++i) d = advance_cut(m, s, d, 1e-3);
  // Relaxes until the elastic force is back at F_y.
  EXPECT_NEAR(m.k_c * (s - d), m.F_y, 1e-6);
  m.depth_limit = 0.002;
  EXPECT_EQ(advance_cut(m, 0.5, 0.0019999, 1.0), 0.002);
}

TEST(Medium, Validation) {
  ContactMedium m;
  EXPECT_TRUE(violations(m).empty());
  m.k_c = 0.0;
  m.F_y = -1.0;
  EXPECT_EQ(violations(m).size(), 2u);
  StabGeometry g;
  EXPECT_TRUE(violations(g).empty());
  g.accel = 0.0;
  EXPECT_EQ(violations(g), std::vector<std::string>{"stab.accel: must be > 0"});
}

// Point mass m hitting the layer at v, no cutting: the closed-form
// underdamped oscillator holds until the force first returns to zero.
TEST(Medium, ImpactMatchesMassSpringDamperOracle) {
  ContactMedium med;
  med.F_y = 1e9;
  const double mass = 1.7, v0 = 0.48, dt = 1e-5;
  const double wn = std::sqrt(med.k_c / mass);
  const double zeta = med.c_c / (2.0 * std::sqrt(med.k_c * mass));
  const double wd = wn * std::sqrt(1.0 - zeta * zeta);
  const auto oracle_x = [&](double t) { return v0 / wd * std::exp(-zeta * wn * t) * std::sin(wd * t); };
  const auto oracle_v = [&](double t) {
    return v0 * std::exp(-zeta * wn * t) * (std::cos(wd * t) - zeta * wn / wd * std::sin(wd * t));
  };
  // Start just inside so the damper term is active from the first stage.
  double x = 1e-15, v = v0, peak = 0.0, peak_oracle = 0.0;
  const auto acc = [&](double xx, double vv) { return -contact_force(med, xx, vv, 0.0) / mass; };
  for (int i = 1;; ++i) {
    const double k1x = v, k1v = acc(x, v);
    const double k2x = v + 0.5 * dt * k1v, k2v = acc(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v);
    const double k3x = v + 0.5 * dt * k2v, k3v = acc(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v);
    const double k4x = v + dt * k3v, k4v = acc(x + dt * k3x, v + dt * k3v);
    x += dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
    v += dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    const double t = i * dt;
    const double f_oracle = med.k_c * oracle_x(t) + med.c_c * oracle_v(t);
    if (f_oracle <= 0.0) break;
    ASSERT_NEAR(x, oracle_x(t), 1e-9) << t;
    peak = std::max(peak, contact_force(med, x, v, 0.0));
    peak_oracle = std::max(peak_oracle, f_oracle);
  }
  EXPECT_NEAR(peak, peak_oracle, 1e-4);
  EXPECT_GT(peak_oracle, 0.9 * v0 * std::sqrt(med.k_c * mass));
}

TEST(Stab, CaseTable) {
  const ArmParams p;
  EXPECT_EQ(stab_case(1, p).stiffness, 70.0);
  EXPECT_EQ(stab_case(1, p).reaction, ReactionStrategy::ZeroTorque);
  EXPECT_EQ(stab_case(2, p).stiffness, 8000.0);
  EXPECT_EQ(stab_case(2, p).reaction, ReactionStrategy::ZeroTorque);
  EXPECT_EQ(stab_case(3, p).stiffness, 8000.0);
  EXPECT_EQ(stab_case(3, p).reaction, ReactionStrategy::ZeroTorquePlusSoften);
  EXPECT_THROW(stab_case(4, p), InvalidArgument);
}

class StabSweep : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    report_ = new CalibrationReport(
        calibrate_with_mismatch(ArmParams{}, ObserverConfig{}, TrackingConfig{}, {-23.62, 650.69}, StabGeometry{}, {}));
  }
  static void TearDownTestSuite() { delete report_; }
  static StabResult run(int c, double v, const ContactMedium& m = {}, StabTrace* trace = nullptr) {
    const ArmParams p;
    return run_stab_scenario(c, v, p, p, ObserverConfig{}, report_->threshold, m, StabGeometry{}, PidGains{}, trace);
  }
  static CalibrationReport* report_;
};
CalibrationReport* StabSweep::report_ = nullptr;

const std::vector<double> kVelocities{0.2, 0.3, 0.4, 0.48, 0.6, 0.8};

TEST_F(StabSweep, CalibrationRunsAreCollisionFree) {
  EXPECT_EQ(report_->runs, 4u * (1u + 3u * 6u));
  EXPECT_TRUE((report_->threshold.r_hat_max.array() > 0.0).all());
  EXPECT_TRUE(report_->threshold.epsilon_r.isApprox(report_->threshold.r_hat_max + Vec2::Ones()));
}

TEST_F(StabSweep, ShippedYieldForceLiesInCalibratedBracket) {
  const ArmParams p;
  const auto mc = calibrate_medium({}, p, ObserverConfig{}, report_->threshold, StabGeometry{}, PidGains{});
  EXPECT_LT(mc.F_y_low, mc.F_y_high);
  EXPECT_GT(ContactMedium{}.F_y, mc.F_y_low);
  EXPECT_LT(ContactMedium{}.F_y, mc.F_y_high);
}

TEST_F(StabSweep, CaseOrderingByDetectionDelay) {
  const ArmParams p;
  const auto rows = sweep(kVelocities, {1, 2, 3}, p, ObserverConfig{}, report_->threshold, {}, StabGeometry{},
                          PidGains{});
  ASSERT_EQ(rows.size(), 18u);
  const auto at = [&](int c, std::size_t i) { return rows[(c - 1) * kVelocities.size() + i]; };
  for (int c : {1, 2, 3}) {
    for (std::size_t i = 0; i < kVelocities.size(); ++i) {
      EXPECT_EQ(at(c, i).case_id, c);
      EXPECT_EQ(at(c, i).velocity, kVelocities[i]);
      if (i > 0) {
        EXPECT_GE(at(c, i).d_p, at(c, i - 1).d_p) << c << " " << kVelocities[i];
        EXPECT_GE(at(c, i).F_p, at(c, i - 1).F_p) << c << " " << kVelocities[i];
      }
    }
  }
  for (std::size_t i = 0; i < kVelocities.size(); ++i) {
    EXPECT_GE(at(2, i).d_p, at(3, i).d_p);
    EXPECT_GE(at(3, i).d_p, at(1, i).d_p);
    EXPECT_GE(at(2, i).F_p, at(1, i).F_p);
  }
  EXPECT_EQ(at(1, 3).d_p, 0.0);  // case 1 at 0.48 m/s
  EXPECT_GT(at(1, 4).d_p, 0.0);
  for (const auto& r : rows) {
    EXPECT_GE(r.detected_at, 0.0);
    if (r.d_p > 0.0) EXPECT_LT(r.detected_at, r.peak_force_at);
    EXPECT_EQ(r.tau_after_detection, 0.0);
  }
}

TEST_F(StabSweep, SlowApproachDoesNotCut) {
  for (int c : {1, 2, 3}) EXPECT_EQ(run(c, 0.02).d_p, 0.0);
}

TEST_F(StabSweep, StifferMediumDoesNotLowerPeakForce) {
  ContactMedium stiff;
  stiff.k_c *= 2.0;
  for (int c : {1, 2, 3})
    for (double v : {0.3, 0.48, 0.8}) EXPECT_GE(run(c, v, stiff).F_p, run(c, v).F_p) << c << " " << v;
}

TEST_F(StabSweep, ReactionTraces) {
  StabTrace t2, t3;
  const auto r2 = run(2, 0.6, {}, &t2);
  const auto r3 = run(3, 0.6, {}, &t3);
  const ArmParams p;
  bool seen_drop = false;
  for (std::size_t i = 0; i < t3.t.size(); ++i) {
    if (t3.t[i] <= r3.detected_at) continue;
    EXPECT_EQ(t3.tau2[i], 0.0);
    if (i > 0 && t3.t[i - 1] > r3.detected_at) {
      EXPECT_LE(t3.k2[i], t3.k2[i - 1]);
      EXPECT_GE(t3.k2[i - 1] - t3.k2[i], 0.0);
      EXPECT_LE(t3.k2[i - 1] - t3.k2[i], p.stiffness_rate() * 1e-3 * (1 + 1e-9));
      seen_drop = seen_drop || t3.k2[i] < t3.k2[i - 1];
    }
  }
  EXPECT_TRUE(seen_drop);
  for (std::size_t i = 0; i < t2.t.size(); ++i)
    if (t2.t[i] > r2.detected_at) {
      EXPECT_EQ(t2.tau2[i], 0.0);
      EXPECT_EQ(t2.k2[i], 8000.0);
    }
}

TEST_F(StabSweep, RejectsBadInput) {
  EXPECT_THROW(run(1, 0.0), InvalidArgument);
  EXPECT_THROW(run(1, 5.0), InvalidArgument);  // not reachable in 0.2 m
  const ArmParams p;
  EXPECT_THROW(sweep({}, {1}, p, ObserverConfig{}, report_->threshold, {}, StabGeometry{}, PidGains{}),
               InvalidArgument);
  EXPECT_EQ(sweep({0.3}, {2}, p, ObserverConfig{}, report_->threshold, {}, StabGeometry{}, PidGains{}).size(), 1u);
}

}  // namespace
}  // namespace vsasrl
