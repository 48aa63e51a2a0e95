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
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "asvplan/rrt_star.hpp"
#include "support/oracles.hpp"

namespace asvplan {
namespace {

using testing::reference_map;

WorldMap open_water() {
  WorldMap map;
  map.x_min = -5.0;
  map.x_max = 15.0;
  map.y_min = -10.0;
  map.y_max = 10.0;
  return map;
}

PlannerConfig config_with(std::uint64_t seed, int iterations) {
  PlannerConfig c;
  c.rng_seed = seed;
  c.max_iterations = iterations;
  return c;
}

double recompute_cost(const std::vector<TreeNode>& tree, std::size_t i) {
  double sum = 0.0;
  for (std::size_t n = i; tree[n].parent; n = *tree[n].parent) {
    sum += distance(tree[n].position, tree[*tree[n].parent].position);
  }
  return sum;
}

TEST(RrtStar, EmptyMapApproachesStraightLine) {
  const auto path = plan_path({0, 0}, {10, 0}, open_water(), config_with(42, 3000));
  EXPECT_LE(path.cost, 10.5);
  EXPECT_GE(path.cost, 10.0 - 1e-12);
}

TEST(RrtStar, ReferenceWithinVisibilityOracle) {
  const WorldMap map = reference_map();
  const PlannerConfig config = config_with(42, 5000);
  const double oracle = testing::visibility_shortest_path({2, 15}, {18, 1}, map, config.inflate);
  ASSERT_TRUE(std::isfinite(oracle));
  const auto path = plan_path({2, 15}, {18, 1}, map, config);
  EXPECT_LE(path.cost, 1.3 * oracle);
  EXPECT_GE(path.cost, oracle * (1.0 - 1e-3));
  for (std::size_t i = 1; i < path.vertices.size(); ++i) {
    EXPECT_TRUE(segment_free(path.vertices[i - 1], path.vertices[i], map, config.inflate));
  }
}

TEST(RrtStar, StartEqualsGoal) {
  const auto path = plan_path({3, 3}, {3, 3}, reference_map(), PlannerConfig{});
  ASSERT_EQ(path.vertices.size(), 1u);
  EXPECT_EQ(path.cost, 0.0);
}

TEST(RrtStar, PathEndpointsAndCost) {
  const PlannerConfig config = config_with(7, 3000);
  const auto path = plan_path({2, 15}, {18, 1}, reference_map(), config);
  ASSERT_GE(path.vertices.size(), 2u);
  EXPECT_EQ(path.vertices.front(), (Vec2{2, 15}));
  EXPECT_LE(distance(path.vertices.back(), {18, 1}), config.goal_tolerance);
  double length = 0.0;
  for (std::size_t i = 1; i < path.vertices.size(); ++i) {
    length += distance(path.vertices[i - 1], path.vertices[i]);
  }
  EXPECT_NEAR(length, path.cost, 1e-9);
}

TEST(RrtStar, Deterministic) {
  const PlannerConfig config = config_with(123, 2000);
  RrtStar a({2, 15}, {18, 1}, reference_map(), config);
  RrtStar b({2, 15}, {18, 1}, reference_map(), config);
  const auto pa = a.run();
  const auto pb = b.run();
  ASSERT_EQ(a.tree().size(), b.tree().size());
  for (std::size_t i = 0; i < a.tree().size(); ++i) {
    EXPECT_EQ(a.tree()[i].position, b.tree()[i].position);
    EXPECT_EQ(a.tree()[i].parent, b.tree()[i].parent);
    EXPECT_EQ(a.tree()[i].cost, b.tree()[i].cost);
  }
  ASSERT_EQ(pa.vertices.size(), pb.vertices.size());
  EXPECT_EQ(pa.cost, pb.cost);
}

TEST(RrtStar, DifferentSeedsDiffer) {
  const auto pa = plan_path({2, 15}, {18, 1}, reference_map(), config_with(1, 1500));
  const auto pb = plan_path({2, 15}, {18, 1}, reference_map(), config_with(2, 1500));
  EXPECT_NE(pa.cost, pb.cost);
}

TEST(RrtStar, AnytimeCostNonIncreasing) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RrtStar planner({2, 15}, {18, 1}, reference_map(), config_with(seed, 3000));
    planner.run();
    const auto& history = planner.cost_history();
    ASSERT_EQ(history.size(), 30u);
    for (std::size_t i = 1; i < history.size(); ++i) {
      EXPECT_LE(history[i], history[i - 1]) << "seed " << seed << " at " << i;
    }
  }
}

TEST(RrtStar, TreeCostsMatchRootSums) {
  for (std::uint64_t seed : {3u, 11u}) {
    RrtStar planner({2, 15}, {18, 1}, reference_map(), config_with(seed, 3000));
    planner.run();
    const auto& tree = planner.tree();
    EXPECT_FALSE(tree[0].parent.has_value());
    EXPECT_EQ(tree[0].cost, 0.0);
    for (std::size_t i = 1; i < tree.size(); ++i) {
      ASSERT_TRUE(tree[i].parent.has_value());
      EXPECT_NEAR(tree[i].cost, recompute_cost(tree, i), 1e-9);
    }
  }
}

TEST(RrtStar, TreeEdgesAreFree) {
  const PlannerConfig config = config_with(5, 3000);
  RrtStar planner({2, 15}, {18, 1}, reference_map(), config);
  planner.run();
  for (const auto& node : planner.tree()) {
    if (!node.parent) continue;
    EXPECT_TRUE(segment_free(planner.tree()[*node.parent].position, node.position,
                             reference_map(), config.inflate));
  }
}

TEST(RrtStar, BlockedEndpointsRejected) {
  try {
    plan_path({4.7, 8.0}, {18, 1}, reference_map(), PlannerConfig{});
    FAIL() << "expected InvalidInput";
  } catch (const PlanningError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }
}

TEST(RrtStar, SealedGoalHasNoPath) {
  WorldMap map;
  map.obstacles = {AxisRect{15.0, 10.0, 1.0, 20.0}};
  try {
    plan_path({2, 10}, {18, 10}, map, config_with(1, 500));
    FAIL() << "expected NoPathFound";
  } catch (const PlanningError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNoPathFound);
  }
}

TEST(RrtStar, ConfigValidation) {
  PlannerConfig c;
  c.step_size = 0.0;
  EXPECT_THROW(c.validate(), PlanningError);
  c = PlannerConfig{};
  c.goal_bias = 1.5;
  EXPECT_THROW(c.validate(), PlanningError);
  c = PlannerConfig{};
  c.max_iterations = 0;
  EXPECT_THROW(c.validate(), PlanningError);
  c = PlannerConfig{};
  c.goal_tolerance = 0.0;
  EXPECT_THROW(c.validate(), PlanningError);
}

TEST(Waypoints, CollinearPathHasNone) {
  PlannedPath path;
  for (int i = 0; i < 10; ++i) path.vertices.push_back({1.0 + i, 2.0});
  path.cost = 9.0;
  EXPECT_TRUE(extract_waypoints(path, reference_map(), 0.7).empty());
}

TEST(Waypoints, LShapeKeepsTheCorner) {
  WorldMap map;
  map.x_max = 10.0;
  map.y_max = 10.0;
  map.obstacles = {AxisRect{5.0, 5.0, 6.0, 6.0}};
  PlannedPath path;
  for (int i = 1; i <= 9; ++i) path.vertices.push_back({1.0, static_cast<double>(i)});
  for (int i = 2; i <= 9; ++i) path.vertices.push_back({static_cast<double>(i), 9.0});
  // The direct shortcut crosses the block.
  ASSERT_FALSE(segment_free({1, 1}, {9, 9}, map, 0.5));
  const auto waypoints = extract_waypoints(path, map, 0.5);
  ASSERT_EQ(waypoints.size(), 1u);
  EXPECT_EQ(waypoints[0], (Vec2{1.0, 9.0}));
}

TEST(Waypoints, ReferencePathCountBandAndFree) {
  const double hull = VesselParams{}.hull_radius;
  for (std::uint64_t seed : {42u, 1u, 2u}) {
    PlannerConfig config = config_with(seed, 5000);
    config.inflate = 1.0;
    const auto path = plan_path({2, 15}, {18, 1}, reference_map(), config);
    const auto waypoints = extract_waypoints(path, reference_map(), hull);
    EXPECT_GE(waypoints.size(), 1u) << "seed " << seed;
    EXPECT_LE(waypoints.size(), 4u) << "seed " << seed;
    std::vector<Vec2> chain{{2, 15}};
    chain.insert(chain.end(), waypoints.begin(), waypoints.end());
    chain.push_back(path.vertices.back());
    for (std::size_t i = 1; i < chain.size(); ++i) {
      EXPECT_TRUE(segment_free(chain[i - 1], chain[i], reference_map(), hull));
    }
  }
}

TEST(Waypoints, OrderPreservedAlongPath) {
  PlannerConfig config = config_with(9, 3000);
  const auto path = plan_path({2, 15}, {18, 1}, reference_map(), config);
  const auto waypoints = extract_waypoints(path, reference_map(), config.inflate);
  std::size_t cursor = 0;
  for (Vec2 w : waypoints) {
    while (cursor < path.vertices.size() && !(path.vertices[cursor] == w)) ++cursor;
    ASSERT_LT(cursor, path.vertices.size());
  }
}

}  // namespace
}  // namespace asvplan
