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

#include <gtest/gtest.h>

#include "vsasrl/kinematics.hpp"

namespace vsasrl {
namespace {

constexpr double kL1 = 674.0;
constexpr double kL2 = 545.0;

TEST(ForwardKinematics, FullyExtendedReach) {
  const auto p = forward_kinematics(kL1, kL2, Vec2(0.0, 0.0));
  EXPECT_NEAR(p.x, 0.0, 1e-12);
  EXPECT_NEAR(p.y, 1219.0, 1e-12);
}

TEST(ForwardKinematics, RightAngleElbow) {
  const auto p = forward_kinematics(kL1, kL2, Vec2(0.0, kPi / 2));
  EXPECT_NEAR(p.x, -545.0, 1e-12);
  EXPECT_NEAR(p.y, 674.0, 1e-12);
}

TEST(ForwardKinematics, StaysInsideAnnulus) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ang(-2 * kPi, 2 * kPi);
  for (int n = 0; n < 10000; ++n) {
    const double r = forward_kinematics(kL1, kL2, Vec2(ang(rng), ang(rng))).vec().norm();
    ASSERT_LE(r, kL1 + kL2 + 1e-9);
    ASSERT_GE(r, std::abs(kL1 - kL2) - 1e-9);
  }
}

TEST(ForwardKinematics, TemplatedOnScalar) {
  const Vector2<float> p = forward_kinematics<float>(Vector2<float>(674.f, 545.f), Vector2<float>(0.f, 0.f));
  EXPECT_FLOAT_EQ(p(1), 1219.f);
}

TEST(Jacobian, MatchesCentralDifferences) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  const double h = 1e-6;
  for (int n = 0; n < 2000; ++n) {
    const Vec2 th(ang(rng), ang(rng));
    const Mat2 j = jacobian(kL1, kL2, th);
    Mat2 fd;
    for (int c = 0; c < 2; ++c) {
      Vec2 dp = Vec2::Zero();
      dp(c) = h;
      fd.col(c) = (forward_kinematics(kL1, kL2, Vec2(th + dp)).vec() -
                   forward_kinematics(kL1, kL2, Vec2(th - dp)).vec()) / (2 * h);
    }
    ASSERT_LT((j - fd).norm() / j.norm(), 1e-6);
  }
}

TEST(Jacobian, SingularWhenStretchedOrFolded) {
  EXPECT_NEAR(jacobian(kL1, kL2, Vec2(0.4, 0.0)).determinant(), 0.0, 1e-9);
  EXPECT_NEAR(jacobian(kL1, kL2, Vec2(0.4, kPi)).determinant(), 0.0, 1e-9);
  // |det J| = l1 l2 |sin theta2|.
  EXPECT_NEAR(std::abs(jacobian(kL1, kL2, Vec2(0.4, 1.0)).determinant()), kL1 * kL2 * std::sin(1.0), 1e-6);
}

TEST(Jacobian, EndEffectorSpeedAlongTrajectory) {
  // theta(t) = a + b sin(w t); compare |J theta_dot| with differentiated FK.
  const Vec2 a(0.3, 0.9), b(0.2, -0.4);
  const double w = 1.7, h = 1e-6;
  auto theta = [&](double t) { return Vec2(a + b * std::sin(w * t)); };
  for (double t = 0.0; t < 3.0; t += 0.1) {
    const Vec2 thd = b * w * std::cos(w * t);
    const double analytic = (jacobian(kL1, kL2, theta(t)) * thd).norm();
    const double numeric = (forward_kinematics(kL1, kL2, theta(t + h)).vec() -
                            forward_kinematics(kL1, kL2, theta(t - h)).vec()).norm() / (2 * h);
    EXPECT_NEAR(analytic, numeric, 1e-5 * std::max(1.0, numeric));
  }
}

TEST(InverseKinematics, BoundaryOfAnnulus) {
  for (Elbow e : {Elbow::Up, Elbow::Down}) {
    const Vec2 th = inverse_kinematics(kL1, kL2, {0.0, 1219.0}, e);
    EXPECT_NEAR(th(0), 0.0, 1e-6);
    EXPECT_NEAR(th(1), 0.0, 1e-6);
  }
}

TEST(InverseKinematics, BeyondReachThrows) {
  EXPECT_THROW(inverse_kinematics(kL1, kL2, {0.0, 1300.0}, Elbow::Up), UnreachableTarget);
  EXPECT_THROW(inverse_kinematics(kL1, kL2, {0.0, 100.0}, Elbow::Up), UnreachableTarget);
}

TEST(InverseKinematics, OutOfLimitsThrows) {
  // Reachable, but theta1 would have to be negative.
  EXPECT_THROW(inverse_kinematics(kL1, kL2, {-900.0, 400.0}, Elbow::Up), JointLimitError);
  // The down branch needs theta2 < 0.
  EXPECT_THROW(inverse_kinematics(kL1, kL2, {-23.62, 650.69}, Elbow::Down), JointLimitError);
}

TEST(InverseKinematics, TrackingTargetRoundTrips) {
  const PlanarPose target{-23.62, 650.69};
  const Vec2 th = inverse_kinematics(kL1, kL2, target, Elbow::Up);
  // Closed-form values: theta2 from the cosine rule, theta1 from the bearing.
  const double r2 = target.x * target.x + target.y * target.y;
  const double t2 = std::acos((r2 - kL1 * kL1 - kL2 * kL2) / (2 * kL1 * kL2));
  EXPECT_NEAR(th(1), t2, 1e-12);
  EXPECT_NEAR(rad2deg(th(0)), 46.45, 0.02);
  EXPECT_NEAR(rad2deg(th(1)), 116.46, 0.02);
  const auto back = forward_kinematics(kL1, kL2, th);
  EXPECT_NEAR(back.x, target.x, 1e-9);
  EXPECT_NEAR(back.y, target.y, 1e-9);
}

TEST(InverseKinematics, RoundTripBothBranches) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> t1(0.0, deg2rad(65.0)), t2(deg2rad(1.0), deg2rad(125.0));
  const JointLimits up;
  const JointLimits down{Vec2(0.0, -deg2rad(125.0)), Vec2(deg2rad(65.0), 0.0)};
  for (int n = 0; n < 5000; ++n) {
    const Vec2 th(t1(rng), t2(rng));
    const auto p = forward_kinematics(kL1, kL2, th);
    const Vec2 sol = inverse_kinematics(kL1, kL2, p, Elbow::Up, up);
    ASSERT_TRUE(sol.isApprox(th, 1e-9));
    const auto q = forward_kinematics(kL1, kL2, sol);
    ASSERT_NEAR(q.x, p.x, 1e-9);
    ASSERT_NEAR(q.y, p.y, 1e-9);

    const Vec2 mirrored(th(0), -th(1));
    const auto pd = forward_kinematics(kL1, kL2, mirrored);
    const auto sd = solve_ik(kL1, kL2, pd, Elbow::Down);
    ASSERT_TRUE(sd.has_value());
    ASSERT_TRUE(down.contains(*sd, 1e-9));
    const auto qd = forward_kinematics(kL1, kL2, *sd);
    ASSERT_NEAR(qd.x, pd.x, 1e-9);
    ASSERT_NEAR(qd.y, pd.y, 1e-9);
  }
}

}  // namespace
}  // namespace vsasrl
