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

// End-to-end planning: RRT* front end, waypoint extraction, one corridor per
// segment, then sequential segment optimization where each segment inherits
// the terminal pose, velocity and control of the one before it.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "asvplan/dynamics.hpp"
#include "asvplan/errors.hpp"
#include "asvplan/nlp_solver.hpp"
#include "asvplan/rrt_star.hpp"
#include "asvplan/transcription.hpp"
#include "asvplan/world.hpp"

namespace asvplan {

struct Scenario {
  WorldMap map;
  VesselParams vessel;
  Pose start;  // at rest
  Pose goal;   // at rest
  ObjectiveKind objective = ObjectiveKind::kMinControlInput;
  double lambda_input = 1.0;
  double lambda_accel = 1.0;
  BoundSet bounds;
  PlannerConfig planner;
  SolverConfig solver;
  int nodes_per_segment = 21;

  bool operator==(const Scenario&) const = default;

  Objective active_objective() const {
    return {objective, objective == ObjectiveKind::kMinControlInput ? lambda_input
                                                                   : lambda_accel};
  }

  void validate() const {
    map.validate();
    vessel.validate();
    bounds.validate();
    planner.validate();
    solver.validate();
    if (nodes_per_segment < 3) {
      throw PlanningError(ErrorKind::kInvalidInput, "nodes_per_segment must be >= 3");
    }
    if (!(lambda_input >= 0.0) || !(lambda_accel >= 0.0)) {
      throw PlanningError(ErrorKind::kInvalidInput, "objective weights must be >= 0");
    }
    if (!is_free({start.x, start.y}, map, vessel.hull_radius)) {
      throw PlanningError(ErrorKind::kInvalidInput,
                          "start position is not free at hull inflation");
    }
    if (!is_free({goal.x, goal.y}, map, vessel.hull_radius)) {
      throw PlanningError(ErrorKind::kInvalidInput,
                          "goal position is not free at hull inflation");
    }
  }
};

struct SegmentReport {
  SolveStatus status = SolveStatus::kMaxIterations;
  double max_constraint_violation = 0.0;
  double objective = 0.0;
  int nodes = 0;
};

/// One row of a sampled trajectory; acceleration is always derived from the
/// velocity and control in the same row.
struct TrajectorySample {
  double t = 0.0;
  Pose pose;
  BodyVelocity vel;
  BodyAcceleration acc;
  ControlInput tau;
  ThrusterForces forces;
  int segment = 0;
};

struct FullTrajectory {
  std::vector<SegmentTrajectory> segments;
  std::vector<Vec2> waypoints;
  std::vector<Corridor> corridors;
  std::vector<SegmentReport> reports;
  std::vector<Vec2> front_end_path;

  double total_duration() const {
    double total = 0.0;
    for (const auto& s : segments) total += s.duration();
    return total;
  }

  /// Every collocation node plus `subdivisions - 1` evenly spaced points inside
  /// each interval. Junction nodes appear once, attributed to the later
  /// segment. Because the control is linear between nodes, linear
  /// interpolation of these rows reproduces the control spline exactly.
  std::vector<TrajectorySample> sample(int subdivisions = 4) const {
    std::vector<TrajectorySample> rows;
    double offset = 0.0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const auto& seg = segments[i];
      const int intervals = seg.nodes() - 1;
      for (int k = 0; k < intervals; ++k) {
        for (int j = 0; j < subdivisions; ++j) {
          if (i > 0 && k == 0 && j == 0) {
            // The junction row was already emitted by the previous segment;
            // re-label it to the later segment.
            rows.back().segment = static_cast<int>(i);
            continue;
          }
          const double s = j == 0 ? seg.node_time(k)
                                  : seg.node_time(k) + seg.step() * j / subdivisions;
          rows.push_back(make_sample(seg, s, offset, static_cast<int>(i)));
        }
      }
      rows.push_back(make_sample(seg, seg.duration(), offset, static_cast<int>(i)));
      offset += seg.duration();
    }
    return rows;
  }

 private:
  static TrajectorySample make_sample(const SegmentTrajectory& seg, double s,
                                      double offset, int index) {
    const auto state = seg.state_at(s);
    const auto tau = seg.control_at(s);
    return {offset + s,
            state.pose,
            state.vel,
            acceleration(state.vel, tau, seg.params()),
            tau,
            allocate_thrusters(tau, seg.params()),
            index};
  }
};

/// Straight-line initial guess, clipped into the problem's box.
inline Vector initial_guess(const SegmentNlp& nlp) {
  const auto& problem = nlp.problem();
  const int K = nlp.nodes();
  const Vec2 a{problem.start.pose.x, problem.start.pose.y};
  const Vec2 b = nlp.end_position();
  const double d = distance(a, b);
  const double cruise = 0.5 * problem.bounds.vel_hi.u;
  const double t_max = problem.bounds.t_max;
  double t_guess = cruise > 0.0 ? d / cruise : t_max;
  t_guess = std::clamp(t_guess, std::min(1.0, t_max), t_max);
  const double u = std::min(cruise, d / t_guess);
  const double bearing = d > 0.0 ? std::atan2(b.y - a.y, b.x - a.x) : problem.start.pose.psi;

  Vector z = Vector::Zero(nlp.num_variables());
  z[SegmentNlp::time_index()] = t_guess;
  for (int k = 0; k < K; ++k) {
    const double frac = static_cast<double>(k) / (K - 1);
    const Vec2 p = a + frac * (b - a);
    z[nlp.state_index(k, 0)] = p.x;
    z[nlp.state_index(k, 1)] = p.y;
    z[nlp.state_index(k, 2)] = k == 0 ? problem.start.pose.psi : bearing;
    z[nlp.state_index(k, 3)] = u;
    z[nlp.control_index(k, 0)] = problem.params.damping_surge * u;
  }
  return detail::project(z, nlp.lower_bounds(), nlp.upper_bounds());
}

namespace detail {

inline Box bounding_box(Vec2 a, Vec2 b) {
  return {std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y), std::max(a.y, b.y)};
}

// Smallest gap between `box` and any obstacle inflated by `inflate`;
// negative when the box is blocked.
inline double box_margin(const Box& box, const WorldMap& map, double inflate) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& obstacle : map.obstacles) {
    const auto core = to_rounded(obstacle);
    const double overlap_x = std::min(box.x_max, core.x1) - std::max(box.x_min, core.x0);
    const double overlap_y = std::min(box.y_max, core.y1) - std::max(box.y_min, core.y0);
    if (overlap_x > 0.0 && overlap_y > 0.0) {
      margin = std::min(margin, -std::min(overlap_x, overlap_y));
      continue;
    }
    margin = std::min(margin, box_core_distance(box, core) - core.radius -
                                  inflate - map.margin);
  }
  return margin;
}

// Splits straight legs whose endpoint bounding box touches an inflated
// obstacle, so every leg admits an axis-aligned corridor. A single split
// point with the largest margin is preferred; otherwise the leg is halved.
inline void refine_for_corridors(std::vector<Vec2>& points, const WorldMap& map,
                                 double inflate, int max_depth = 6) {
  constexpr int kCandidates = 64;
  std::vector<Vec2> refined{points.front()};
  auto split = [&](auto&& self, Vec2 p, Vec2 q, int depth) -> void {
    if (depth >= max_depth || box_margin(bounding_box(p, q), map, inflate) >= 0.0) {
      refined.push_back(q);
      return;
    }
    double best_margin = -1.0;
    Vec2 best{};
    for (int i = 1; i < kCandidates; ++i) {
      const Vec2 m = p + (static_cast<double>(i) / kCandidates) * (q - p);
      const double margin = std::min(box_margin(bounding_box(p, m), map, inflate),
                                     box_margin(bounding_box(m, q), map, inflate));
      if (margin > best_margin) {
        best_margin = margin;
        best = m;
      }
    }
    if (best_margin >= 0.0) {
      refined.push_back(best);
      refined.push_back(q);
      return;
    }
    const Vec2 mid = 0.5 * (p + q);
    self(self, p, mid, depth + 1);
    self(self, mid, q, depth + 1);
  };
  for (std::size_t i = 1; i < points.size(); ++i) split(split, points[i - 1], points[i], 0);
  points = std::move(refined);
}

// Node bounds only constrain the collocation points, and the state spline can
// bulge slightly between them. Each side is pulled in by up to `inset`, never
// past the segment endpoints.
inline Corridor node_corridor(const Corridor& c, Vec2 a, Vec2 b, double inset) {
  return {std::min(c.x_min + inset, std::min(a.x, b.x)),
          std::max(c.x_max - inset, std::max(a.x, b.x)),
          std::min(c.y_min + inset, std::min(a.y, b.y)),
          std::max(c.y_max - inset, std::max(a.y, b.y))};
}

// Points along the polyline no more than `spacing` apart, vertices included.
inline std::vector<Vec2> resample(std::span<const Vec2> path, double spacing) {
  std::vector<Vec2> out;
  if (path.empty()) return out;
  out.push_back(path.front());
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Vec2 a = path[i - 1];
    const Vec2 b = path[i];
    const int pieces = std::max(1, static_cast<int>(std::ceil(distance(a, b) / spacing)));
    for (int j = 1; j <= pieces; ++j) {
      out.push_back(a + (static_cast<double>(j) / pieces) * (b - a));
    }
  }
  return out;
}

// Greedy farthest-reach shortcut over a resampled front-end path: each leg's
// endpoint bounding box must be free at `corridor_inflate`, which also makes
// the straight leg itself free. Legs that cannot be formed this way are left
// to refine_for_corridors.
inline std::vector<Vec2> corridor_waypoints(const PlannedPath& path, const WorldMap& map,
                                            double corridor_inflate, double spacing = 0.05) {
  std::vector<Vec2> waypoints;
  const auto v = resample(path.vertices, spacing);
  if (v.size() <= 2) return waypoints;
  std::size_t anchor = 0;
  while (anchor + 1 < v.size()) {
    std::size_t next = anchor + 1;
    for (std::size_t j = v.size() - 1; j > anchor + 1; --j) {
      if (box_margin(bounding_box(v[anchor], v[j]), map, corridor_inflate) >= 0.0) {
        next = j;
        break;
      }
    }
    if (next == v.size() - 1) break;
    waypoints.push_back(v[next]);
    anchor = next;
  }
  return waypoints;
}

}  // namespace detail

struct SegmentSolve {
  SegmentTrajectory trajectory;
  SegmentReport report;
};

/// Solves one segment, retrying once with twice the nodes on failure.
inline SegmentSolve solve_segment(SegmentProblem problem, const SolverConfig& config,
                                  int index) {
  Solution solution;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const SegmentNlp nlp(problem);
    solution = minimize(nlp, initial_guess(nlp), config);
    spdlog::debug("segment {} nodes {} status {} violation {:.3g} objective {:.6g} t {:.4g}",
                  index, problem.nodes, to_string(solution.status),
                  solution.max_constraint_violation, solution.objective,
                  solution.z[SegmentNlp::time_index()]);
    if (solution.status == SolveStatus::kConverged) {
      return {decode(nlp, solution.z),
              {solution.status, solution.max_constraint_violation, solution.objective,
               problem.nodes}};
    }
    problem.nodes *= 2;
  }
  throw PlanningError(ErrorKind::kSegmentInfeasible,
                      "segment " + std::to_string(index) + " did not converge (" +
                          to_string(solution.status) + ")");
}

inline constexpr double kNodeInset = 0.05;  // [m]

inline FullTrajectory plan_trajectory(const Scenario& scenario) {
  scenario.validate();
  const double hull = scenario.vessel.hull_radius;
  const Vec2 start{scenario.start.x, scenario.start.y};
  const Vec2 goal{scenario.goal.x, scenario.goal.y};

  FullTrajectory result;
  PlannedPath path;
  try {
    path = plan_path(start, goal, scenario.map, scenario.planner);
  } catch (const PlanningError& e) {
    throw PlanningError(ErrorKind::kFrontEndFailed, e.what());
  }
  result.front_end_path = path.vertices;

  std::vector<Vec2> points{start};
  for (Vec2 w : detail::corridor_waypoints(path, scenario.map, hull)) {
    points.push_back(w);
  }
  points.push_back(goal);
  detail::refine_for_corridors(points, scenario.map, hull);
  result.waypoints.assign(points.begin() + 1, points.end() - 1);
  spdlog::info("front end: path cost {:.3f} m, {} waypoints", path.cost,
               result.waypoints.size());

  BoundaryState boundary{scenario.start, {}, {}};
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const bool last = i + 2 == points.size();
    Corridor corridor;
    try {
      corridor = compute_corridor(points[i], points[i + 1], scenario.map, hull);
    } catch (const PlanningError& e) {
      throw PlanningError(ErrorKind::kCorridorFailed,
                          "segment " + std::to_string(i) + ": " + e.what());
    }
    result.corridors.push_back(corridor);

    SegmentProblem problem;
    problem.start = boundary;
    problem.end = last ? EndCondition{RestEnd{scenario.goal}}
                       : EndCondition{WaypointEnd{points[i + 1]}};
    problem.corridor = detail::node_corridor(corridor, points[i], points[i + 1], kNodeInset);
    problem.bounds = scenario.bounds;
    problem.objective = scenario.active_objective();
    problem.nodes = scenario.nodes_per_segment;
    problem.params = scenario.vessel;

    auto solved = solve_segment(problem, scenario.solver, static_cast<int>(i));
    spdlog::info("segment {}: t = {:.3f} s, violation {:.2e}", i,
                 solved.trajectory.duration(), solved.report.max_constraint_violation);
    const auto end = solved.trajectory.terminal();
    boundary = {end.pose, end.vel, solved.trajectory.terminal_control()};
    result.segments.push_back(std::move(solved.trajectory));
    result.reports.push_back(solved.report);
  }
  return result;
}

}  // namespace asvplan
