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

// Open-loop re-integration of a planned trajectory and the comparison metrics
// reported for each run.
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "asvplan/dynamics.hpp"
#include "asvplan/errors.hpp"
#include "asvplan/pipeline.hpp"
#include "asvplan/world.hpp"

namespace asvplan {

/// Fixed-step classical Runge-Kutta.
struct SimConfig {
  double dt = 0.01;

  bool operator==(const SimConfig&) const = default;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
      throw PlanningError(ErrorKind::kInvalidInput, "sim.dt must be positive");
    }
  }
};

struct Metrics {
  double avg_speed = 0.0;
  double min_obstacle_distance = kNoObstacleClearance;
  double avg_control_input = 0.0;  // mean |dtau/dt|, N/s
  double total_time = 0.0;
  double tracking_rmse = 0.0;
};

struct SimResult {
  std::vector<TrajectorySample> series;
  Metrics metrics;
  // Distance between the integrated and planned final positions.
  double terminal_deviation = 0.0;
};

namespace detail {

struct SimState {
  Pose pose;
  BodyVelocity vel;
};

inline SimState advance(const SimState& s, const StateDerivative& d, double a) {
  return {{s.pose.x + a * d.pose_rate.dx, s.pose.y + a * d.pose_rate.dy,
           s.pose.psi + a * d.pose_rate.dpsi},
          {s.vel.u + a * d.acc.du, s.vel.v + a * d.acc.dv, s.vel.r + a * d.acc.dr}};
}

inline SimState rk4_step(const SimState& x, const ControlInput& tau0,
                         const ControlInput& tau1, double h, const VesselParams& p) {
  const ControlInput tau_mid{0.5 * (tau0.tau_u + tau1.tau_u),
                             0.5 * (tau0.tau_r + tau1.tau_r)};
  const auto k1 = state_derivative(x.pose, x.vel, tau0, p);
  const auto s2 = advance(x, k1, 0.5 * h);
  const auto k2 = state_derivative(s2.pose, s2.vel, tau_mid, p);
  const auto s3 = advance(x, k2, 0.5 * h);
  const auto k3 = state_derivative(s3.pose, s3.vel, tau_mid, p);
  const auto s4 = advance(x, k3, h);
  const auto k4 = state_derivative(s4.pose, s4.vel, tau1, p);
  auto blend = [](double a, double b, double c, double d) { return a + 2.0 * b + 2.0 * c + d; };
  const StateDerivative sum{
      {blend(k1.pose_rate.dx, k2.pose_rate.dx, k3.pose_rate.dx, k4.pose_rate.dx),
       blend(k1.pose_rate.dy, k2.pose_rate.dy, k3.pose_rate.dy, k4.pose_rate.dy),
       blend(k1.pose_rate.dpsi, k2.pose_rate.dpsi, k3.pose_rate.dpsi, k4.pose_rate.dpsi)},
      {blend(k1.acc.du, k2.acc.du, k3.acc.du, k4.acc.du),
       blend(k1.acc.dv, k2.acc.dv, k3.acc.dv, k4.acc.dv),
       blend(k1.acc.dr, k2.acc.dr, k3.acc.dr, k4.acc.dr)}};
  return advance(x, sum, h / 6.0);
}

inline ControlInput lerp(const ControlInput& a, const ControlInput& b, double w) {
  return {a.tau_u + w * (b.tau_u - a.tau_u), a.tau_r + w * (b.tau_r - a.tau_r)};
}

inline TrajectorySample make_row(double t, const SimState& s, const ControlInput& tau,
                                 int segment, const VesselParams& p) {
  return {t, s.pose, s.vel, acceleration(s.vel, tau, p), tau, allocate_thrusters(tau, p),
          segment};
}

}  // namespace detail

inline Metrics compute_metrics(std::span<const TrajectorySample> series,
                               const WorldMap& map) {
  if (series.empty()) {
    throw PlanningError(ErrorKind::kInvalidInput, "metrics need a non-empty series");
  }
  auto speed = [](const TrajectorySample& s) {
    const auto rate = rotate_to_earth(s.pose.psi, s.vel);
    return std::hypot(rate.dx, rate.dy);
  };
  Metrics m;
  std::vector<Vec2> positions;
  positions.reserve(series.size());
  for (const auto& s : series) positions.push_back({s.pose.x, s.pose.y});
  m.min_obstacle_distance = min_trajectory_clearance(positions, map);
  m.total_time = series.back().t - series.front().t;
  if (series.size() == 1 || !(m.total_time > 0.0)) {
    m.avg_speed = speed(series.front());
    m.total_time = 0.0;
    return m;
  }
  // Time-weighted means; the input rate is a finite difference per interval.
  double distance_covered = 0.0;
  double input_variation = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double dt = series[i].t - series[i - 1].t;
    distance_covered += 0.5 * dt * (speed(series[i - 1]) + speed(series[i]));
    input_variation += std::hypot(series[i].tau.tau_u - series[i - 1].tau.tau_u,
                                  series[i].tau.tau_r - series[i - 1].tau.tau_r);
  }
  m.avg_speed = distance_covered / m.total_time;
  m.avg_control_input = input_variation / m.total_time;
  return m;
}

/// Integrates from the first row's state with the control held linear between
/// consecutive rows. Every row time is hit exactly and tracking error is
/// measured there. Divergence shows up in the metrics, never as an exception.
inline SimResult simulate(std::span<const TrajectorySample> plan, const VesselParams& params,
                          const WorldMap& map, const SimConfig& config) {
  config.validate();
  if (plan.empty()) {
    throw PlanningError(ErrorKind::kInvalidInput, "cannot simulate an empty trajectory");
  }
  SimResult result;
  detail::SimState x{plan.front().pose, plan.front().vel};
  result.series.push_back(
      detail::make_row(plan.front().t, x, plan.front().tau, plan.front().segment, params));
  double squared_error = 0.0;
  for (std::size_t i = 1; i < plan.size(); ++i) {
    const auto& a = plan[i - 1];
    const auto& b = plan[i];
    const double span = b.t - a.t;
    if (!(span > 0.0)) {
      throw PlanningError(ErrorKind::kInvalidInput, "trajectory times must increase");
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(span / config.dt - 1e-9)));
    const double h = span / steps;
    for (int j = 0; j < steps; ++j) {
      const auto tau0 = detail::lerp(a.tau, b.tau, static_cast<double>(j) / steps);
      const auto tau1 = detail::lerp(a.tau, b.tau, static_cast<double>(j + 1) / steps);
      x = detail::rk4_step(x, tau0, tau1, h, params);
      const bool at_knot = j + 1 == steps;
      result.series.push_back(detail::make_row(at_knot ? b.t : a.t + (j + 1) * h, x,
                                               at_knot ? b.tau : tau1,
                                               at_knot ? b.segment : a.segment, params));
    }
    squared_error += std::pow(x.pose.x - b.pose.x, 2) + std::pow(x.pose.y - b.pose.y, 2);
  }
  result.metrics = compute_metrics(result.series, map);
  result.metrics.tracking_rmse = std::sqrt(squared_error / static_cast<double>(plan.size()));
  result.terminal_deviation =
      std::hypot(x.pose.x - plan.back().pose.x, x.pose.y - plan.back().pose.y);
  return result;
}

inline SimResult simulate(const FullTrajectory& traj, const VesselParams& params,
                          const WorldMap& map, const SimConfig& config = {}) {
  const auto rows = traj.sample();
  return simulate(rows, params, map, config);
}

}  // namespace asvplan
