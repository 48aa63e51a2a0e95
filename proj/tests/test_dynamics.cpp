// Copyright 2026 The asvplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "asvplan/dynamics.hpp"

namespace asvplan {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(Rotation, IdentityAtZeroHeading) {
  const auto rate = rotate_to_earth(0.0, {1.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(rate.dx, 1.0);
  EXPECT_DOUBLE_EQ(rate.dy, 0.0);
  EXPECT_DOUBLE_EQ(rate.dpsi, 0.0);
}

TEST(Rotation, QuarterTurn) {
  const auto rate = rotate_to_earth(kPi / 2.0, {1.0, 0.0, 0.0});
  EXPECT_NEAR(rate.dx, 0.0, 1e-15);
  EXPECT_NEAR(rate.dy, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(rate.dpsi, 0.0);
}

TEST(Rotation, DiagonalVelocityAtEighthTurn) {
  const auto rate = rotate_to_earth(kPi / 4.0, {1.0, 1.0, 0.5});
  EXPECT_NEAR(rate.dx, 0.0, 1e-15);
  EXPECT_NEAR(rate.dy, std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(rate.dpsi, 0.5);
}

TEST(Acceleration, RestStaysAtRest) {
  const auto a = acceleration({0, 0, 0}, {0, 0}, VesselParams{});
  EXPECT_EQ(a, (BodyAcceleration{0.0, 0.0, 0.0}));
}

TEST(Acceleration, SteadySurgeBalancesDamping) {
  const auto a = acceleration({1.0, 0.0, 0.0}, {20.0, 0.0}, VesselParams{});
  EXPECT_NEAR(a.du, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(a.dv, 0.0);
  EXPECT_DOUBLE_EQ(a.dr, 0.0);
}

TEST(Acceleration, MatchesScalarSubstitution) {
  const VesselParams p;
  const BodyVelocity vel{0.5, 0.2, 0.1};
  const auto a = acceleration(vel, {10.0, 1.0}, p);
  EXPECT_NEAR(a.du, 10.0 / 29.0 - 0.2 * 0.1 - 20.0 / 29.0 * 0.5, 1e-15);
  EXPECT_NEAR(a.dv, 0.5 * 0.1 - 20.0 / 29.0 * 0.2, 1e-15);
  EXPECT_NEAR(a.dr, 1.0 / 2.8 - 20.0 / 2.8 * 0.1, 1e-15);
}

TEST(Jerk, ZeroInputsGiveZero) {
  const auto j = jerk({0, 0, 0}, {0, 0, 0}, {0, 0}, VesselParams{});
  EXPECT_DOUBLE_EQ(j.ddu, 0.0);
  EXPECT_DOUBLE_EQ(j.ddv, 0.0);
  EXPECT_DOUBLE_EQ(j.ddr, 0.0);
}

TEST(Jerk, SurgeForceRate) {
  const auto j = jerk({1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {29.0, 0.0}, VesselParams{});
  EXPECT_NEAR(j.ddu, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(j.ddv, 0.0);
  EXPECT_DOUBLE_EQ(j.ddr, 0.0);
}

TEST(Jerk, AgreesWithForwardDifferenceAlongFlow) {
  const VesselParams p;
  const BodyVelocity vel{0.8, -0.3, 0.2};
  const ControlInput tau{15.0, -2.0};
  const ControlRate rate{3.0, 0.5};
  const auto acc = acceleration(vel, tau, p);
  const double eps = 1e-6;
  const auto ahead =
      acceleration({vel.u + eps * acc.du, vel.v + eps * acc.dv, vel.r + eps * acc.dr},
                   {tau.tau_u + eps * rate.dtau_u, tau.tau_r + eps * rate.dtau_r}, p);
  const auto j = jerk(vel, acc, rate, p);
  EXPECT_NEAR(j.ddu, (ahead.du - acc.du) / eps, 1e-5);
  EXPECT_NEAR(j.ddv, (ahead.dv - acc.dv) / eps, 1e-5);
  EXPECT_NEAR(j.ddr, (ahead.dr - acc.dr) / eps, 1e-5);
}

TEST(Thrusters, ZeroForce) {
  const auto f = allocate_thrusters({0.0, 0.0}, VesselParams{});
  EXPECT_DOUBLE_EQ(f.port, 0.0);
  EXPECT_DOUBLE_EQ(f.starboard, 0.0);
}

TEST(Thrusters, SymmetricSurgeSplitsEvenly) {
  for (double b : {0.2, 0.5, 1.3}) {
    VesselParams p;
    p.half_width = b;
    const auto f = allocate_thrusters({10.0, 0.0}, p);
    EXPECT_DOUBLE_EQ(f.port, 5.0);
    EXPECT_DOUBLE_EQ(f.starboard, 5.0);
  }
}

TEST(Thrusters, SurgeAndYaw) {
  const auto f = allocate_thrusters({10.0, 2.0}, VesselParams{});
  EXPECT_DOUBLE_EQ(f.port, 7.0);
  EXPECT_DOUBLE_EQ(f.starboard, 3.0);
}

TEST(Thrusters, ForcesToTau) {
  const VesselParams p;
  EXPECT_EQ(thrust_to_tau({5.0, 5.0}, p), (ControlInput{10.0, 0.0}));
  EXPECT_EQ(thrust_to_tau({7.0, 3.0}, p), (ControlInput{10.0, 2.0}));
  EXPECT_EQ(thrust_to_tau({0.0, 1.0}, p), (ControlInput{1.0, -0.5}));
}

TEST(StateDerivative, RestHasZeroDerivative) {
  const auto d = state_derivative({3.0, -2.0, 1.1}, {0, 0, 0}, {0, 0}, VesselParams{});
  EXPECT_DOUBLE_EQ(std::abs(d.pose_rate.dx) + std::abs(d.pose_rate.dy), 0.0);
  EXPECT_DOUBLE_EQ(d.pose_rate.dpsi, 0.0);
  EXPECT_EQ(d.acc, (BodyAcceleration{0.0, 0.0, 0.0}));
}

TEST(StateDerivative, SteadySurge) {
  const auto d = state_derivative({0, 0, 0}, {1.0, 0.0, 0.0}, {20.0, 0.0}, VesselParams{});
  EXPECT_DOUBLE_EQ(d.pose_rate.dx, 1.0);
  EXPECT_DOUBLE_EQ(d.pose_rate.dy, 0.0);
  EXPECT_DOUBLE_EQ(d.pose_rate.dpsi, 0.0);
  EXPECT_NEAR(d.acc.du, 0.0, 1e-15);
}

TEST(StateDerivative, IsCompositionOfParts) {
  const VesselParams p;
  const Pose pose{1.0, 2.0, 0.7};
  const BodyVelocity vel{0.4, 0.1, -0.2};
  const ControlInput tau{8.0, 1.5};
  const auto d = state_derivative(pose, vel, tau, p);
  const auto r = rotate_to_earth(pose.psi, vel);
  EXPECT_EQ(d.pose_rate.dx, r.dx);
  EXPECT_EQ(d.pose_rate.dy, r.dy);
  EXPECT_EQ(d.pose_rate.dpsi, r.dpsi);
  EXPECT_EQ(d.acc, acceleration(vel, tau, p));
}

TEST(VesselState, AccelerationFollowsControl) {
  const VesselParams p;
  const VesselState s({0, 0, 0}, {0.5, 0.1, 0.05}, {12.0, -1.0}, p);
  EXPECT_EQ(s.acceleration(), acceleration({0.5, 0.1, 0.05}, {12.0, -1.0}, p));
}

TEST(VesselParams, RejectsNonPhysicalValues) {
  VesselParams p;
  p.mass = 0.0;
  EXPECT_THROW(p.validate(), PlanningError);
  p = VesselParams{};
  p.damping_yaw = -1.0;
  EXPECT_THROW(p.validate(), PlanningError);
  p = VesselParams{};
  p.hull_radius = 0.0;
  EXPECT_THROW(p.validate(), PlanningError);
  EXPECT_NO_THROW(VesselParams{}.validate());
}

TEST(NormalizeAngle, WrapsIntoHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(normalize_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(normalize_angle(-kPi), kPi);
  EXPECT_NEAR(normalize_angle(3.0 * kPi / 2.0), -kPi / 2.0, 1e-15);
  EXPECT_NEAR(normalize_angle(-5.0 * kPi / 2.0), -kPi / 2.0, 1e-14);
}

// --- properties over random draws -----------------------------------------

class DynamicsProperty : public ::testing::Test {
 protected:
  std::mt19937_64 rng{7};
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }
};

TEST_F(DynamicsProperty, CoriolisDoesNoWork) {
  const VesselParams p;
  for (int i = 0; i < 1000; ++i) {
    const BodyVelocity nu{uniform(-3, 3), uniform(-3, 3), uniform(-2, 2)};
    // C(nu) nu as implied by the acceleration model with tau = 0 and no damping.
    const double cu = p.mass * nu.v * nu.r;
    const double cv = -p.mass * nu.u * nu.r;
    const double power = nu.u * cu + nu.v * cv;
    EXPECT_NEAR(power, 0.0, 1e-12);
    VesselParams undamped = p;
    undamped.damping_surge = undamped.damping_sway = undamped.damping_yaw = 0.0;
    const auto a = acceleration(nu, {0.0, 0.0}, undamped);
    EXPECT_NEAR(p.mass * (nu.u * a.du + nu.v * a.dv), 0.0, 1e-11);
  }
}

TEST_F(DynamicsProperty, RotationPreservesSpeed) {
  for (int i = 0; i < 1000; ++i) {
    const BodyVelocity nu{uniform(-3, 3), uniform(-3, 3), uniform(-2, 2)};
    const auto rate = rotate_to_earth(uniform(-10, 10), nu);
    EXPECT_NEAR(std::hypot(rate.dx, rate.dy), std::hypot(nu.u, nu.v), 1e-12);
  }
}

TEST_F(DynamicsProperty, ThrustAllocationRoundTrip) {
  for (int i = 0; i < 1000; ++i) {
    VesselParams p;
    p.half_width = uniform(0.1, 2.0);
    const ControlInput tau{uniform(-100, 100), uniform(-50, 50)};
    const auto back = thrust_to_tau(allocate_thrusters(tau, p), p);
    EXPECT_NEAR(back.tau_u, tau.tau_u, 1e-12 * (1.0 + std::abs(tau.tau_u)));
    EXPECT_NEAR(back.tau_r, tau.tau_r, 1e-12 * (1.0 + std::abs(tau.tau_r)));
  }
}

TEST_F(DynamicsProperty, JerkMatchesCentralDifferences) {
  const VesselParams p;
  const double eps = 1e-6;
  for (int i = 0; i < 1000; ++i) {
    const BodyVelocity vel{uniform(-2, 2), uniform(-1, 1), uniform(-1, 1)};
    const ControlInput tau{uniform(-30, 60), uniform(-15, 15)};
    const ControlRate rate{uniform(-20, 20), uniform(-5, 5)};
    const auto acc = acceleration(vel, tau, p);
    auto along = [&](double s) {
      return acceleration({vel.u + s * acc.du, vel.v + s * acc.dv, vel.r + s * acc.dr},
                          {tau.tau_u + s * rate.dtau_u, tau.tau_r + s * rate.dtau_r}, p);
    };
    const auto up = along(eps);
    const auto down = along(-eps);
    const auto j = jerk(vel, acc, rate, p);
    auto check = [](double analytic, double numeric) {
      EXPECT_LE(std::abs(analytic - numeric), 1e-5 * std::max(1.0, std::abs(numeric)));
    };
    check(j.ddu, (up.du - down.du) / (2 * eps));
    check(j.ddv, (up.dv - down.dv) / (2 * eps));
    check(j.ddr, (up.dr - down.dr) / (2 * eps));
  }
}

}  // namespace
}  // namespace asvplan
