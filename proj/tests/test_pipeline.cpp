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


#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "asvplan/pipeline.hpp"
#include "support/oracles.hpp"

namespace asvplan {
namespace {

using testing::reference_scenario;

Scenario open_water_scenario() {
  Scenario s;
  s.map.x_min = -5.0;
  s.map.x_max = 15.0;
  s.map.y_min = -5.0;
  s.map.y_max = 5.0;
  s.start = {0.0, 0.0, 0.0};
  s.goal = {10.0, 0.0, 0.0};
  s.planner.max_iterations = 1500;
  return s;
}

SegmentProblem straight_segment(Vec2 from, Vec2 to) {
  SegmentProblem p;
  p.start.pose = {from.x, from.y, 0.3};
  p.end = WaypointEnd{to};
  p.corridor = {std::min(from.x, to.x) - 1.0, std::max(from.x, to.x) + 1.0,
                std::min(from.y, to.y) - 1.0, std::max(from.y, to.y) + 1.0};
  return p;
}

std::vector<Vec2> dense_positions(const SegmentTrajectory& seg, int samples) {
  std::vector<Vec2> out;
  for (int i = 0; i <= samples; ++i) {
    const auto st = seg.state_at(seg.duration() * i / samples);
    out.push_back({st.pose.x, st.pose.y});
  }
  return out;
}

TEST(InitialGuess, CoincidentEndpoints) {
  const SegmentNlp nlp(straight_segment({3.0, 3.0}, {3.0, 3.0}));
  const Vector z = initial_guess(nlp);
  EXPECT_EQ(z[SegmentNlp::time_index()], 1.0);
  for (int k = 0; k < nlp.nodes(); ++k) {
    EXPECT_EQ(z[nlp.state_index(k, 3)], 0.0);
    EXPECT_EQ(z[nlp.state_index(k, 4)], 0.0);
    EXPECT_EQ(z[nlp.state_index(k, 5)], 0.0);
  }
}

TEST(InitialGuess, EightAndAHalfMetres) {
  const SegmentNlp nlp(straight_segment({1.0, 1.0}, {9.5, 1.0}));
  const Vector z = initial_guess(nlp);
  EXPECT_NEAR(z[SegmentNlp::time_index()], 10.0, 1e-12);
  EXPECT_NEAR(z[nlp.state_index(5, 3)], 0.85, 1e-12);
  EXPECT_NEAR(z[nlp.control_index(5, 0)], 20.0 * 0.85, 1e-12);
  EXPECT_EQ(z[nlp.state_index(0, 2)], 0.3);
  EXPECT_EQ(z[nlp.state_index(5, 2)], 0.0);
  EXPECT_NEAR(z[nlp.state_index(10, 0)], 1.0 + 8.5 * 0.5, 1e-12);
}

TEST(InitialGuess, AlwaysInsideBox) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> coord(0.0, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec2 a{coord(rng), coord(rng)};
    const Vec2 b{coord(rng), coord(rng)};
    auto problem = straight_segment(a, b);
    problem.start.tau = {10.0, -2.0};
    problem.bounds.t_max = 60.0;
    if (trial % 2 == 0) problem.end = RestEnd{{b.x, b.y, 1.0}};
    const SegmentNlp nlp(problem);
    const Vector z = initial_guess(nlp);
    EXPECT_TRUE((z.array() >= nlp.lower_bounds().array()).all());
    EXPECT_TRUE((z.array() <= nlp.upper_bounds().array()).all());
  }
}

TEST(Scenario, Validation) {
  auto s = reference_scenario();
  EXPECT_NO_THROW(s.validate());
  s.start = {4.7, 8.0, 0.0};
  EXPECT_THROW(s.validate(), PlanningError);
  s = reference_scenario();
  s.goal = {18.0, 19.9, 0.0};  // hull crosses the map edge
  EXPECT_THROW(s.validate(), PlanningError);
  s = reference_scenario();
  s.nodes_per_segment = 2;
  EXPECT_THROW(s.validate(), PlanningError);
  s = reference_scenario();
  s.lambda_accel = -1.0;
  EXPECT_THROW(s.validate(), PlanningError);
}

TEST(Scenario, ActiveObjectiveWeight) {
  auto s = reference_scenario(ObjectiveKind::kMinAcceleration);
  EXPECT_EQ(s.active_objective().weight, s.lambda_accel);
  s.objective = ObjectiveKind::kMinControlInput;
  EXPECT_EQ(s.active_objective().weight, s.lambda_input);
}

TEST(Detail, CorridorRefinementMakesEveryLegBoxFree) {
  const auto map = testing::reference_map();
  // Free legs; the diagonal one cuts past a block corner so its box is not.
  std::vector<Vec2> points{{2.0, 15.0}, {6.0, 12.0}, {9.5, 9.0}, {9.5, 3.0}, {18.0, 1.0}};
  for (std::size_t i = 1; i < points.size(); ++i) {
    ASSERT_TRUE(segment_free(points[i - 1], points[i], map, 0.7));
  }
  ASSERT_LT(detail::box_margin(detail::bounding_box(points[1], points[2]), map, 0.7), 0.0);
  detail::refine_for_corridors(points, map, 0.7);
  ASSERT_GT(points.size(), 5u);
  EXPECT_EQ(points.front(), (Vec2{2.0, 15.0}));
  EXPECT_EQ(points.back(), (Vec2{18.0, 1.0}));
  for (std::size_t i = 1; i < points.size(); ++i) {
    EXPECT_GE(detail::box_margin(detail::bounding_box(points[i - 1], points[i]), map, 0.7),
              0.0);
  }
}

TEST(Detail, BoxMarginSeesOverlapWithSharpCore) {
  WorldMap map;
  map.obstacles = {AxisRect{5.0, 5.0, 2.0, 2.0}};
  EXPECT_LT(detail::box_margin({4.5, 5.5, 0.0, 10.0}, map, 0.0), 0.0);
  EXPECT_NEAR(detail::box_margin({0.0, 3.0, 0.0, 10.0}, map, 0.5), 0.5, 1e-12);
}

TEST(Detail, NodeCorridorStopsAtEndpoints) {
  const Corridor c{0.0, 10.0, 0.0, 10.0};
  const auto inner = detail::node_corridor(c, {0.02, 5.0}, {8.0, 10.0}, 0.05);
  EXPECT_EQ(inner.x_min, 0.02);
  EXPECT_EQ(inner.x_max, 9.95);
  EXPECT_EQ(inner.y_min, 0.05);
  EXPECT_EQ(inner.y_max, 10.0);
}

TEST(Detail, ResampleSpacing) {
  const std::vector<Vec2> path{{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.33}};
  const auto dense = detail::resample(path, 0.1);
  EXPECT_EQ(dense.front(), path.front());
  EXPECT_EQ(dense.back(), path.back());
  for (std::size_t i = 1; i < dense.size(); ++i) {
    EXPECT_LE(distance(dense[i - 1], dense[i]), 0.1 + 1e-12);
  }
  EXPECT_EQ(dense.size(), 1u + 10u + 4u);
}

TEST(PlanTrajectory, OpenWaterStraightRun) {
  const auto s = open_water_scenario();
  const auto traj = plan_trajectory(s);
  ASSERT_EQ(traj.segments.size(), 1u);
  EXPECT_TRUE(traj.waypoints.empty());
  const auto& seg = traj.segments.front();
  for (int i = 0; i <= 200; ++i) {
    const auto st = seg.state_at(seg.duration() * i / 200);
    EXPECT_NEAR(st.pose.y, 0.0, 1e-6);
    EXPECT_NEAR(st.pose.psi, 0.0, 1e-6);
    EXPECT_GE(st.vel.u, -1e-6);
  }
  const auto end = seg.terminal();
  EXPECT_EQ(end.pose.x, 10.0);
  EXPECT_EQ(end.vel.u, 0.0);
  EXPECT_EQ(end.vel.v, 0.0);
  EXPECT_EQ(end.vel.r, 0.0);
  EXPECT_EQ(seg.terminal_control().tau_u, 0.0);
  EXPECT_LE(seg.duration(), s.bounds.t_max);
}

TEST(PlanTrajectory, InvalidScenarioRejected) {
  auto s = reference_scenario();
  s.goal = {15.0, 6.0, 0.0};
  try {
    plan_trajectory(s);
    FAIL();
  } catch (const PlanningError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }
}

TEST(PlanTrajectory, SealedGoalIsFrontEndFailure) {
  auto s = reference_scenario();
  s.map.obstacles = {AxisRect{15.0, 10.0, 1.0, 20.0}};
  s.planner.max_iterations = 500;
  try {
    plan_trajectory(s);
    FAIL();
  } catch (const PlanningError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFrontEndFailed);
  }
}

TEST(PlanTrajectory, UnreachableDurationIsSegmentInfeasible) {
  auto s = open_water_scenario();
  s.bounds.t_max = 7.0;  // top speed 1.97 m/s allows it, the dynamics do not
  try {
    plan_trajectory(s);
    FAIL();
  } catch (const PlanningError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSegmentInfeasible);
  }
}

// One reference plan per objective, shared across the invariant checks.
class ReferencePlan : public ::testing::TestWithParam<ObjectiveKind> {
 protected:
  static const FullTrajectory& plan(ObjectiveKind kind) {
    static std::map<ObjectiveKind, FullTrajectory> cache;
    auto it = cache.find(kind);
    if (it == cache.end()) it = cache.emplace(kind, plan_trajectory(reference_scenario(kind))).first;
    return it->second;
  }
};

TEST_P(ReferencePlan, CollisionFreeAtHullInflation) {
  const auto& traj = plan(GetParam());
  const auto map = testing::reference_map();
  const double hull = VesselParams{}.hull_radius;
  for (const auto& seg : traj.segments) {
    const auto samples = dense_positions(seg, 200);
    EXPECT_GT(min_trajectory_clearance(samples, map) - hull, 0.0);
    for (Vec2 p : samples) EXPECT_TRUE(is_free(p, map, hull));
  }
}

TEST_P(ReferencePlan, SegmentsStayInTheirCorridors) {
  const auto& traj = plan(GetParam());
  ASSERT_EQ(traj.corridors.size(), traj.segments.size());
  for (std::size_t i = 0; i < traj.segments.size(); ++i) {
    for (Vec2 p : dense_positions(traj.segments[i], 200)) {
      EXPECT_TRUE(traj.corridors[i].contains(p, 1e-6)) << "segment " << i;
    }
  }
}

TEST_P(ReferencePlan, JunctionsAreContinuous) {
  const auto& traj = plan(GetParam());
  const double tol = 10.0 * SolverConfig{}.constraint_tolerance;
  for (std::size_t i = 0; i + 1 < traj.segments.size(); ++i) {
    const auto& a = traj.segments[i];
    const auto& b = traj.segments[i + 1];
    const StateVector gap = a.state_vector_at(a.duration()) - b.state_vector_at(0.0);
    EXPECT_LE(gap.lpNorm<Eigen::Infinity>(), tol);
    const auto ta = a.terminal_control();
    const auto tb = b.control_at(0.0);
    EXPECT_LE(std::abs(ta.tau_u - tb.tau_u), tol);
    EXPECT_LE(std::abs(ta.tau_r - tb.tau_r), tol);
  }
}

TEST_P(ReferencePlan, WaypointsHitAndDurationsBounded) {
  const auto& traj = plan(GetParam());
  const auto s = reference_scenario(GetParam());
  ASSERT_EQ(traj.waypoints.size() + 1, traj.segments.size());
  EXPECT_GE(traj.waypoints.size(), 2u);
  EXPECT_LE(traj.waypoints.size(), 4u);
  for (std::size_t i = 0; i < traj.waypoints.size(); ++i) {
    const auto end = traj.segments[i].terminal().pose;
    EXPECT_LE(distance({end.x, end.y}, traj.waypoints[i]), s.solver.constraint_tolerance);
  }
  const auto first = traj.segments.front().initial().pose;
  EXPECT_EQ(first.x, s.start.x);
  EXPECT_EQ(first.y, s.start.y);
  const auto last = traj.segments.back().terminal();
  EXPECT_EQ(last.pose.x, s.goal.x);
  EXPECT_EQ(last.pose.y, s.goal.y);
  EXPECT_EQ(last.vel.u, 0.0);
  for (const auto& seg : traj.segments) EXPECT_LE(seg.duration(), s.bounds.t_max);
  for (const auto& r : traj.reports) {
    EXPECT_EQ(r.status, SolveStatus::kConverged);
    EXPECT_LE(r.max_constraint_violation, s.solver.constraint_tolerance);
  }
}

TEST_P(ReferencePlan, SampleTableIsOrderedAndSpansThePlan) {
  const auto& traj = plan(GetParam());
  const auto rows = traj.sample();
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows.front().t, 0.0);
  EXPECT_NEAR(rows.back().t, traj.total_duration(), 1e-9);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GT(rows[i].t, rows[i - 1].t);
    EXPECT_GE(rows[i].segment, rows[i - 1].segment);
  }
  for (const auto& row : rows) {
    const auto back = thrust_to_tau(row.forces, VesselParams{});
    EXPECT_NEAR(back.tau_u, row.tau.tau_u, 1e-9);
    EXPECT_NEAR(back.tau_r, row.tau.tau_r, 1e-9);
  }
}

INSTANTIATE_TEST_SUITE_P(BothObjectives, ReferencePlan,
                         ::testing::Values(ObjectiveKind::kMinControlInput,
                                           ObjectiveKind::kMinAcceleration));

}  // namespace
}  // namespace asvplan
