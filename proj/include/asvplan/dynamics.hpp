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

// 3-DOF model of a two-thruster under-actuated surface vessel.
//
//   eta_dot = R(psi) nu
//   M nu_dot = tau - C(nu) nu - D nu
//
// with M = diag(m, m, Iz), D = diag(Xu, Yv, Nr) and
//
//   C(nu) = [ 0    0    m v ]
//           [ 0    0   -m u ]
//           [ m v -m u  0   ]
//
// The sway force is identically zero. All functions here are pure.
#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "asvplan/errors.hpp"

namespace asvplan {

struct VesselParams {
  double mass = 29.0;            // [kg]
  double inertia_z = 2.8;        // [kg m^2]
  double damping_surge = 20.0;   // Xu [kg/s]
  double damping_sway = 20.0;    // Yv [kg/s]
  double damping_yaw = 20.0;     // Nr [kg m^2/s]
  double half_width = 0.5;       // b [m]
  double hull_radius = 0.7;      // bounding circle used for clearance [m]

  bool operator==(const VesselParams&) const = default;

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw PlanningError(ErrorKind::kInvalidInput, what);
    };
    require(std::isfinite(mass) && mass > 0.0, "vessel mass must be > 0");
    require(std::isfinite(inertia_z) && inertia_z > 0.0,
            "vessel yaw inertia must be > 0");
    require(damping_surge >= 0.0 && damping_sway >= 0.0 && damping_yaw >= 0.0,
            "vessel damping coefficients must be >= 0");
    require(std::isfinite(half_width) && half_width > 0.0,
            "vessel half width must be > 0");
    require(std::isfinite(hull_radius) && hull_radius > 0.0,
            "vessel hull radius must be > 0");
  }
};

struct Pose {
  double x = 0.0;    // [m]
  double y = 0.0;    // [m]
  double psi = 0.0;  // heading, anticlockwise [rad]
  bool operator==(const Pose&) const = default;
};

struct PoseRate {
  double dx = 0.0;
  double dy = 0.0;
  double dpsi = 0.0;
};

struct BodyVelocity {
  double u = 0.0;  // surge [m/s]
  double v = 0.0;  // sway [m/s]
  double r = 0.0;  // yaw rate [rad/s]
  bool operator==(const BodyVelocity&) const = default;
};

struct BodyAcceleration {
  double du = 0.0;
  double dv = 0.0;
  double dr = 0.0;
  bool operator==(const BodyAcceleration&) const = default;
};

struct BodyJerk {
  double ddu = 0.0;
  double ddv = 0.0;
  double ddr = 0.0;
};

/// Surge force and yaw moment. Sway force is always zero.
struct ControlInput {
  double tau_u = 0.0;  // [N]
  double tau_r = 0.0;  // [N m]
  bool operator==(const ControlInput&) const = default;
};

struct ControlRate {
  double dtau_u = 0.0;  // [N/s]
  double dtau_r = 0.0;  // [N m/s]
};

struct ThrusterForces {
  double port = 0.0;       // F1 [N]
  double starboard = 0.0;  // F2 [N]
};

/// Wraps an angle to (-pi, pi].
inline double normalize_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(angle + std::numbers::pi, kTwoPi);
  if (wrapped < 0.0) wrapped += kTwoPi;
  wrapped -= std::numbers::pi;
  return wrapped == -std::numbers::pi ? std::numbers::pi : wrapped;
}

/// Body-frame velocity rotated into the earth frame.
inline PoseRate rotate_to_earth(double psi, const BodyVelocity& vel) {
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  return {vel.u * c - vel.v * s, vel.u * s + vel.v * c, vel.r};
}

inline BodyAcceleration acceleration(const BodyVelocity& vel,
                                     const ControlInput& tau,
                                     const VesselParams& p) {
  return {
      tau.tau_u / p.mass - vel.v * vel.r - p.damping_surge / p.mass * vel.u,
      vel.u * vel.r - p.damping_sway / p.mass * vel.v,
      tau.tau_r / p.inertia_z - p.damping_yaw / p.inertia_z * vel.r,
  };
}

/// Time derivative of `acceleration` along a trajectory with the given
/// acceleration and control rate.
inline BodyJerk jerk(const BodyVelocity& vel, const BodyAcceleration& acc,
                     const ControlRate& tau_rate, const VesselParams& p) {
  return {
      tau_rate.dtau_u / p.mass - vel.v * acc.dr - acc.dv * vel.r -
          p.damping_surge / p.mass * acc.du,
      acc.du * vel.r + vel.u * acc.dr - p.damping_sway / p.mass * acc.dv,
      tau_rate.dtau_r / p.inertia_z - p.damping_yaw / p.inertia_z * acc.dr,
  };
}

inline ThrusterForces allocate_thrusters(const ControlInput& tau,
                                         const VesselParams& p) {
  const double differential = tau.tau_r / p.half_width;
  return {0.5 * (tau.tau_u + differential), 0.5 * (tau.tau_u - differential)};
}

inline ControlInput thrust_to_tau(const ThrusterForces& forces,
                                  const VesselParams& p) {
  return {forces.port + forces.starboard,
          p.half_width * (forces.port - forces.starboard)};
}

struct StateDerivative {
  PoseRate pose_rate;
  BodyAcceleration acc;
};

/// Right-hand side of the 6-dimensional ODE in (pose, velocity).
inline StateDerivative state_derivative(const Pose& pose,
                                        const BodyVelocity& vel,
                                        const ControlInput& tau,
                                        const VesselParams& p) {
  return {rotate_to_earth(pose.psi, vel), acceleration(vel, tau, p)};
}

/// Full 9-component state. The acceleration is always derived from the
/// velocity and the control in force, never stored independently.
class VesselState {
 public:
  VesselState() = default;
  VesselState(const Pose& pose, const BodyVelocity& vel,
              const ControlInput& tau, const VesselParams& params)
      : pose_(pose), vel_(vel), acc_(asvplan::acceleration(vel, tau, params)) {}

  const Pose& pose() const { return pose_; }
  const BodyVelocity& velocity() const { return vel_; }
  const BodyAcceleration& acceleration() const { return acc_; }

 private:
  Pose pose_;
  BodyVelocity vel_;
  BodyAcceleration acc_;
};

}  // namespace asvplan
