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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "vsasrl/dynamics.hpp"

namespace vsasrl {
namespace {

// Reference values from scripts/lagrangian_oracle.py (sympy Euler-Lagrange
// derivation from COM kinematics) with the default ArmParams.
constexpr double kOracleTol = 1e-12;

void expect_mat_near(const Mat2& a, std::initializer_list<double> rowmajor, double tol) {
  auto it = rowmajor.begin();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(a(i, j), *it++, tol) << "entry " << i << "," << j;
}

ArmParams frictionless() {
  ArmParams p;
  p.link_damping.setZero();
  p.motor_damping.setZero();
  return p;
}

TEST(MassMatrix, MatchesLagrangianOracle) {
  const ArmParams p;
  expect_mat_near(mass_matrix<double>(p, Vec2(0.3, 0.0)),
                  {0.9889408000000002, -0.25876, -0.25876, 0.097}, kOracleTol);
  expect_mat_near(mass_matrix<double>(p, Vec2(0.3, kPi / 2)),
                  {0.6654208000000001, -0.097, -0.097, 0.097}, kOracleTol);
  expect_mat_near(mass_matrix<double>(p, Vec2(0.3, 0.7)),
                  {0.9128625444302779, -0.22072087221513886, -0.22072087221513886, 0.097},
                  kOracleTol);
}

TEST(MassMatrix, InertiaAboutBaseShrinksAsElbowFolds) {
  const ArmParams p;
  double prev = mass_matrix<double>(p, Vec2(0.0, 0.0))(0, 0);
  for (double t2 = 0.05; t2 <= kPi / 2 + 1e-12; t2 += 0.05) {
    const double m11 = mass_matrix<double>(p, Vec2(0.0, t2))(0, 0);
    EXPECT_LT(m11, prev);
    prev = m11;
  }
}

TEST(MassMatrix, SymmetricPositiveDefiniteOnRandomConfigurations) {
  const ArmParams p;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(-2.0 * kPi, 2.0 * kPi);
  for (int n = 0; n < 10000; ++n) {
    const Mat2 m = mass_matrix<double>(p, Vec2(ang(rng), ang(rng)));
    ASSERT_EQ(m(0, 1), m(1, 0));
    const Eigen::SelfAdjointEigenSolver<Mat2> es(m);
    ASSERT_GT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(ArmParams, RejectsMasslessLink) {
  ArmParams p;
  p.mass(1) = 0.0;
  p.inertia(1) = 0.0;
  try {
    validate(p);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    ASSERT_FALSE(e.violations().empty());
    EXPECT_NE(e.violations().front().find("arm.mass"), std::string::npos);
  }
}

TEST(ArmParams, DefaultsMatchDatasheet) {
  const ArmParams p;
  EXPECT_NO_THROW(validate(p));
  EXPECT_DOUBLE_EQ(p.k_min, 70.0);
  EXPECT_DOUBLE_EQ(p.k_max, 8000.0);
  EXPECT_DOUBLE_EQ(p.t_stiff, 0.450);
  EXPECT_DOUBLE_EQ(p.tau_max, 35.0);
  EXPECT_DOUBLE_EQ(rad2deg(p.omega_max), 120.0);
  EXPECT_DOUBLE_EQ(rad2deg(p.theta_max(0)), 65.0);
  EXPECT_DOUBLE_EQ(rad2deg(p.theta_max(1)), 125.0);
  EXPECT_DOUBLE_EQ(p.length(0), 0.674);
  EXPECT_DOUBLE_EQ(p.length(1), 0.545);
}

TEST(Coriolis, MatchesChristoffelOracle) {
  const ArmParams p;
  expect_mat_near(coriolis_matrix<double>(p, Vec2(0.3, 0.7), Vec2(0.4, -1.1)),
                  {0.11462951839632582, -0.15631297963135338, 0.041683461235027565, 0.0},
                  kOracleTol);
}

TEST(Coriolis, VanishesAtRestAndIsLinearInVelocity) {
  const ArmParams p;
  EXPECT_TRUE(coriolis_matrix<double>(p, Vec2(0.4, 1.2), Vec2::Zero()).isZero(0.0));
  const Vec2 th(0.9, 0.3), v(0.7, -0.2);
  const Mat2 c1 = coriolis_matrix<double>(p, th, v);
  const Mat2 c2 = coriolis_matrix<double>(p, th, Vec2(2.0 * v));
  EXPECT_TRUE(c2.isApprox(2.0 * c1, 1e-15));
}

TEST(Coriolis, MdotMinusTwoCIsSkewSymmetric) {
  const ArmParams p;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(-kPi, kPi), vel(-3.0, 3.0);
  const double h = 1e-5;
  for (int n = 0; n < 2000; ++n) {
    const Vec2 th(ang(rng), ang(rng)), v(vel(rng), vel(rng));
    // dM/dt along the trajectory theta + s v by central differences.
    const Mat2 mdot =
        (mass_matrix<double>(p, Vec2(th + h * v)) - mass_matrix<double>(p, Vec2(th - h * v))) / (2 * h);
    const Mat2 n_mat = mdot - 2.0 * coriolis_matrix<double>(p, th, v);
    ASSERT_LT((n_mat + n_mat.transpose()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Gravity, ZeroOnHorizontalPlane) {
  const ArmParams p;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int n = 0; n < 100; ++n)
    EXPECT_TRUE(gravity_torque<double>(p, Vec2(ang(rng), ang(rng))).isZero(0.0));
}

TEST(Gravity, ZeroWhenLinksHangAlongGravity) {
  ArmParams p;
  p.alpha = kPi / 2;
  // Both links along -y.
  EXPECT_LT(gravity_torque<double>(p, Vec2(kPi, 0.0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gravity, MatchesLagrangianOracle) {
  ArmParams p;
  p.alpha = 0.1;
  const Vec2 g = gravity_torque<double>(p, Vec2(0.3, 0.7));
  EXPECT_NEAR(g(0), -0.20923582322392614, kOracleTol);
  EXPECT_NEAR(g(1), -0.09153192314131664, kOracleTol);
}

TEST(ForwardDynamics, EquilibriumHasZeroAcceleration) {
  const ArmParams p;
  const ArmState s = rest_state(Vec2(0.5, 1.0), 500.0);
  const auto a = forward_dynamics(p, s, Vec2::Zero(), Vec2::Zero());
  EXPECT_TRUE(a.theta_ddot.isZero(1e-15));
  EXPECT_TRUE(a.phi_ddot.isZero(1e-15));
  EXPECT_FALSE(a.saturated);
  EXPECT_FALSE(a.limit_hit);
}

TEST(ForwardDynamics, PureSpringTorque) {
  const ArmParams p = frictionless();
  ArmState s = rest_state(Vec2(0.5, 1.0), 1000.0);
  s.theta(0) += 0.1;
  const auto a = forward_dynamics(p, s, Vec2::Zero(), Vec2::Zero());
  EXPECT_NEAR(a.phi_ddot(0), 1000.0 * 0.1 / p.motor_inertia(0), 1e-12);
  EXPECT_NEAR(a.phi_ddot(1), 0.0, 1e-12);
  const Vec2 expected = mass_matrix<double>(p, s.theta).inverse() * Vec2(-100.0, 0.0);
  EXPECT_TRUE(a.theta_ddot.isApprox(expected, 1e-12));
}

// Forms both equations explicitly and inverts M1 with the 2x2 adjugate.
std::pair<Vec2, Vec2> direct_oracle(const ArmParams& p, const ArmState& s, const Vec2& tau_m,
                                    const Vec2& tau_ext) {
  const double m2 = p.mass(1), l1 = p.length(0), lc1 = p.com(0), lc2 = p.com(1);
  const double c2 = std::cos(s.theta(1)), s2 = std::sin(s.theta(1));
  const double a = p.inertia(0) + p.inertia(1) + p.mass(0) * lc1 * lc1 +
                   m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * c2);
  const double b = -(p.inertia(1) + m2 * (lc2 * lc2 + l1 * lc2 * c2));
  const double d = p.inertia(1) + m2 * lc2 * lc2;
  const double h = m2 * l1 * lc2 * s2;
  const double td1 = s.theta_dot(0), td2 = s.theta_dot(1);
  // Coriolis/centrifugal torque written out term by term.
  const double cor1 = -h * td2 * td1 + h * (td2 - td1) * td2;
  const double cor2 = h * td1 * td1;
  double rhs1 = tau_ext(0) - cor1 - s.k(0) * (s.theta(0) - s.phi(0)) - p.link_damping(0) * td1;
  double rhs2 = tau_ext(1) - cor2 - s.k(1) * (s.theta(1) - s.phi(1)) - p.link_damping(1) * td2;
  const double det = a * d - b * b;
  const Vec2 thdd((d * rhs1 - b * rhs2) / det, (-b * rhs1 + a * rhs2) / det);
  Vec2 phdd;
  for (int i = 0; i < 2; ++i) {
    const double tm = std::clamp(tau_m(i), -p.tau_max, p.tau_max);
    phdd(i) = (tm - s.k(i) * (s.phi(i) - s.theta(i)) - p.motor_damping(i) * s.phi_dot(i)) /
              p.motor_inertia(i);
  }
  return {thdd, phdd};
}

TEST(ForwardDynamics, MatchesDirectLinearSolve) {
  const ArmParams p;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 0; n < 1000; ++n) {
    ArmState s;
    s.theta = Vec2(u(rng) * 1.1, u(rng) * 2.1);
    s.phi = s.theta + Vec2(u(rng) - 0.5, u(rng) - 0.5) * 0.05;
    s.theta_dot = Vec2(u(rng) - 0.5, u(rng) - 0.5) * 4.0;
    s.phi_dot = Vec2(u(rng) - 0.5, u(rng) - 0.5) * 4.0;
    s.k = Vec2(70.0 + u(rng) * 7930.0, 70.0 + u(rng) * 7930.0);
    s.k_target = s.k;
    const Vec2 tau_m = Vec2(u(rng) - 0.5, u(rng) - 0.5) * 100.0;
    const Vec2 tau_ext = Vec2(u(rng) - 0.5, u(rng) - 0.5) * 20.0;
    const auto a = forward_dynamics(p, s, tau_m, tau_ext);
    const auto [thdd, phdd] = direct_oracle(p, s, tau_m, tau_ext);
    ASSERT_TRUE(a.theta_ddot.isApprox(thdd, 1e-10)) << a.theta_ddot.transpose() << " vs " << thdd.transpose();
    ASSERT_TRUE(a.phi_ddot.isApprox(phdd, 1e-10));
  }
}

TEST(ForwardDynamics, SaturatesMotorTorqueAndReportsIt) {
  const ArmParams p;
  const ArmState s = rest_state(Vec2(0.5, 1.0), 500.0);
  const auto a = forward_dynamics(p, s, Vec2(100.0, -10.0), Vec2::Zero());
  EXPECT_TRUE(a.saturated);
  EXPECT_DOUBLE_EQ(a.tau_applied(0), 35.0);
  EXPECT_DOUBLE_EQ(a.tau_applied(1), -10.0);
  EXPECT_NEAR(a.phi_ddot(0), 35.0 / p.motor_inertia(0), 1e-12);
}

TEST(ForwardDynamics, RejectsNonFiniteInput) {
  const ArmParams p;
  ArmState s = rest_state(Vec2(0.5, 1.0), 500.0);
  EXPECT_THROW(forward_dynamics(p, s, Vec2(NAN, 0.0), Vec2::Zero()), NonFiniteError);
  s.theta_dot(1) = INFINITY;
  EXPECT_THROW(forward_dynamics(p, s, Vec2::Zero(), Vec2::Zero()), NonFiniteError);
  EXPECT_THROW(step(p, s, Vec2::Zero(), Vec2::Zero()), NonFiniteError);
}

TEST(ForwardDynamics, EndStopPushesBackAndFlags) {
  const ArmParams p;
  ArmState s = rest_state(Vec2(-0.01, 1.0), 500.0);
  s.phi = s.theta;
  const auto a = forward_dynamics(p, s, Vec2::Zero(), Vec2::Zero());
  EXPECT_TRUE(a.limit_hit);
  const Vec2 expected = mass_matrix<double>(p, s.theta).inverse() * Vec2(p.limit_stiffness * 0.01, 0.0);
  EXPECT_TRUE(a.theta_ddot.isApprox(expected, 1e-12));
}

TEST(Step, RestStaysAtRest) {
  const ArmParams p;
  const ArmState s = rest_state(Vec2(0.5, 1.0), 8000.0);
  const ArmState n = step(p, s, Vec2::Zero(), Vec2::Zero(), 1e-3);
  EXPECT_EQ(n.theta, s.theta);
  EXPECT_EQ(n.phi, s.phi);
  EXPECT_EQ(n.theta_dot, s.theta_dot);
  EXPECT_EQ(n.phi_dot, s.phi_dot);
  EXPECT_DOUBLE_EQ(n.t, 1e-3);
}

TEST(Step, RejectsNonPositiveDt) {
  const ArmParams p;
  const ArmState s = rest_state(Vec2(0.5, 1.0), 70.0);
  EXPECT_THROW(step(p, s, Vec2::Zero(), Vec2::Zero(), 0.0), InvalidArgument);
}

// Joint 2 is held by the exact constraint torque that zeroes its acceleration,
// which reduces joint 1 to a linear two-inertia spring.
struct ClampedJoint1 {
  ArmParams params = frictionless();
  double k = 0.0;
  double x0 = 0.02;
  ArmState initial;
  double m_eff = 0.0;
  double omega = 0.0;

  explicit ClampedJoint1(double stiffness) : k(stiffness) {
    initial = rest_state(Vec2(0.5, 1.2), k);
    initial.theta(0) += x0;
    m_eff = mass_matrix<double>(params, initial.theta)(0, 0);
    omega = std::sqrt(k * (1.0 / m_eff + 1.0 / params.motor_inertia(0)));
  }

  ExternalTorque clamp() const {
    const ArmParams p = params;
    return [p](const ArmState& s) {
      const Mat2 m = mass_matrix<double>(p, s.theta);
      const Vec2 rhs = -coriolis_matrix<double>(p, s.theta, s.theta_dot) * s.theta_dot -
                       s.k.cwiseProduct(s.theta - s.phi);
      return Vec2(0.0, m(1, 0) * rhs(0) / m(0, 0) - rhs(1));
    };
  }

  // Relative deflection theta1 - phi1 sampled every step over `duration`.
  std::vector<double> run(double dt, double duration) const {
    std::vector<double> out;
    ArmState s = initial;
    const auto n = static_cast<long>(std::llround(duration / dt));
    out.push_back(s.theta(0) - s.phi(0));
    for (long i = 0; i < n; ++i) {
      s = integrate(params, s, Vec2::Zero(), clamp(), dt).state;
      out.push_back(s.theta(0) - s.phi(0));
    }
    return out;
  }
};

TEST(Step, ClampedJointOscillatesAtTwoInertiaFrequency) {
  for (double k : {70.0, 8000.0}) {
    const ClampedJoint1 sys(k);
    const double dt = 1e-3;
    const auto x = sys.run(dt, 10.0);
    std::vector<double> crossings;
    for (std::size_t i = 1; i < x.size(); ++i)
      if (x[i - 1] > 0.0 && x[i] <= 0.0)
        crossings.push_back((static_cast<double>(i) - x[i] / (x[i] - x[i - 1])) * dt);
    ASSERT_GE(crossings.size(), 10u);
    const double period = (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
    const double measured = 2.0 * kPi / period;
    EXPECT_NEAR(measured / sys.omega, 1.0, 1e-3) << "k = " << k;
  }
}

TEST(Step, FourthOrderConvergenceAgainstClosedForm) {
  const ClampedJoint1 sys(2000.0);
  const double duration = 1.0;
  auto endpoint_error = [&](double dt) {
    const auto x = sys.run(dt, duration);
    return std::abs(x.back() - sys.x0 * std::cos(sys.omega * duration));
  };
  const double e1 = endpoint_error(2e-3);
  const double e2 = endpoint_error(1e-3);
  const double e3 = endpoint_error(5e-4);
  EXPECT_NEAR(std::log2(e1 / e2), 4.0, 0.3);
  EXPECT_NEAR(std::log2(e2 / e3), 4.0, 0.3);
}

ArmState deflected_state(double k) {
  ArmState s = rest_state(Vec2(deg2rad(30.0), deg2rad(60.0)), k);
  s.phi += Vec2(0.05, -0.04);
  return s;
}

TEST(Step, HalvingDtChangesTenSecondEndpointNegligibly) {
  const ArmParams p = frictionless();
  ArmState a = deflected_state(p.k_min), b = a;
  for (int i = 0; i < 10000; ++i) a = step(p, a, Vec2::Zero(), Vec2::Zero(), 1e-3);
  for (int i = 0; i < 20000; ++i) b = step(p, b, Vec2::Zero(), Vec2::Zero(), 5e-4);
  EXPECT_LT((a.theta - b.theta).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((a.phi - b.phi).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Energy, RestIsZeroAndDeflectionIsElastic) {
  const ArmParams p;
  EXPECT_DOUBLE_EQ(total_energy(p, rest_state(Vec2(0.4, 0.9), 3000.0)), 0.0);
  ArmState s = rest_state(Vec2(0.4, 0.9), 1000.0);
  s.theta(0) += 0.1;
  EXPECT_NEAR(total_energy(p, s), 5.0, 1e-12);
}

TEST(Energy, ConservedWithoutFriction) {
  const ArmParams p = frictionless();
  ArmState s = deflected_state(p.k_min);
  const double e0 = total_energy(p, s);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    s = step(p, s, Vec2::Zero(), Vec2::Zero(), 1e-3);
    worst = std::max(worst, std::abs(total_energy(p, s) - e0) / e0);
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Energy, ConservedWithoutFrictionOnTiltedPlane) {
  ArmParams p = frictionless();
  p.alpha = 0.1;
  // The links point up-plane, so they are held by a conservative link-side
  // spring with potential 0.5 kp |theta - eq|^2 - g(eq) . (theta - eq).
  const Vec2 eq(deg2rad(30.0), deg2rad(60.0));
  const Vec2 g_eq = gravity_torque<double>(p, eq);
  const double kp = 50.0;
  const ExternalTorque hold = [&](const ArmState& s) { return Vec2(g_eq - kp * (s.theta - eq)); };
  auto holding_potential = [&](const ArmState& s) {
    const Vec2 d = s.theta - eq;
    return 0.5 * kp * d.squaredNorm() - g_eq.dot(d);
  };
  ArmState s = rest_state(eq, p.k_min);
  s.phi += Vec2(0.05, -0.04);
  const double e0 = total_energy(p, s) + holding_potential(s);
  const double scale = 0.5 * p.k_min * (0.05 * 0.05 + 0.04 * 0.04);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    s = integrate(p, s, Vec2::Zero(), hold, 1e-3).state;
    worst = std::max(worst, std::abs(total_energy(p, s) + holding_potential(s) - e0) / scale);
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Energy, NonIncreasingWithFriction) {
  const ArmParams p;
  for (double k : {p.k_min, 1000.0}) {
    ArmState s = deflected_state(k);
    s.theta_dot = Vec2(0.2, -0.3);
    double prev = total_energy(p, s);
    for (int i = 0; i < 5000; ++i) {
      s = step(p, s, Vec2::Zero(), Vec2::Zero(), 1e-3);
      const double e = total_energy(p, s);
      ASSERT_LE(e, prev + 1e-12 * std::max(1.0, prev)) << "k=" << k << " step " << i;
      prev = e;
    }
  }
}

TEST(Stiffness, FullRangeRampTakesNominalTime) {
  const ArmParams p;
  ArmState s = rest_state(Vec2(0.5, 1.0), p.k_min);
  s.k_target.setConstant(p.k_max);
  int steps = 0;
  while (s.k(0) < p.k_max && steps < 10000) {
    s = update_stiffness(p, s, 1e-3);
    ++steps;
  }
  EXPECT_NEAR(steps * 1e-3, 0.450, 1e-3 + 1e-12);
  EXPECT_EQ(s.k(0), p.k_max);
}

TEST(Stiffness, HalfRangeRampTakesHalfTheTime) {
  const ArmParams p;
  ArmState s = rest_state(Vec2(0.5, 1.0), p.k_min);
  s.k_target.setConstant(0.5 * (p.k_min + p.k_max));
  int steps = 0;
  while (s.k(1) < s.k_target(1) && steps < 10000) {
    s = update_stiffness(p, s, 1e-3);
    ++steps;
  }
  EXPECT_NEAR(steps * 1e-3, 0.225, 1e-3 + 1e-12);
}

TEST(Stiffness, HoldsAtTargetAndRespectsBoundsAndSlope) {
  const ArmParams p;
  ArmState s = rest_state(Vec2(0.5, 1.0), 3000.0);
  EXPECT_EQ(update_stiffness(p, s, 1e-3).k, s.k);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(p.k_min, p.k_max);
  for (int n = 0; n < 2000; ++n) {
    if (n % 50 == 0) s.k_target = Vec2(u(rng), u(rng));
    const ArmState next = update_stiffness(p, s, 1e-3);
    ASSERT_LE((next.k - s.k).cwiseAbs().maxCoeff(), p.stiffness_rate() * 1e-3 * (1 + 1e-12));
    ASSERT_TRUE((next.k.array() >= p.k_min).all() && (next.k.array() <= p.k_max).all());
    s = next;
  }
}

}  // namespace
}  // namespace vsasrl
