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

// Geometric RRT* over 2-D position space and shortcut waypoint extraction.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "asvplan/errors.hpp"
#include "asvplan/world.hpp"

namespace asvplan {

struct PlannerConfig {
  int max_iterations = 5000;
  double step_size = 1.0;       // steer extension [m]
  double goal_bias = 0.05;
  double gamma = 20.0;          // rewiring radius constant [m]
  double goal_tolerance = 0.3;  // [m]
  std::uint64_t rng_seed = 42;
  double inflate = 0.7;         // clearance margin [m]

  bool operator==(const PlannerConfig&) const = default;

  void validate() const {
    if (max_iterations < 1 || !(step_size > 0.0) || !(goal_bias >= 0.0) ||
        !(goal_bias <= 1.0) || !(goal_tolerance > 0.0) || !(gamma >= 0.0) ||
        !(inflate >= 0.0)) {
      throw PlanningError(ErrorKind::kInvalidInput,
                          "planner configuration out of range");
    }
  }
};

struct TreeNode {
  Vec2 position;
  std::optional<std::size_t> parent;
  double cost = 0.0;  // path length from the root
  std::vector<std::size_t> children;
};

struct PlannedPath {
  std::vector<Vec2> vertices;
  double cost = 0.0;
};

/// Single-threaded RRT* instance. Owns its tree and random generator; two
/// planners with the same inputs produce identical trees.
class RrtStar {
 public:
  RrtStar(Vec2 start, Vec2 goal, const WorldMap& map, PlannerConfig config)
      : start_(start), goal_(goal), map_(map), config_(config),
        rng_(config.rng_seed) {
    config_.validate();
    if (!is_free(start, map, config_.inflate)) {
      throw PlanningError(ErrorKind::kInvalidInput, "start position is not free");
    }
    if (!is_free(goal, map, config_.inflate)) {
      throw PlanningError(ErrorKind::kInvalidInput, "goal position is not free");
    }
    nodes_.push_back({start, std::nullopt, 0.0, {}});
  }

  /// Runs the full iteration budget. Throws NoPathFound when no branch
  /// reaches the goal.
  PlannedPath run() {
    if (distance(start_, goal_) <= 0.0) return {{start_}, 0.0};
    for (int i = 1; i <= config_.max_iterations; ++i) {
      iterate();
      if (i % 100 == 0) cost_history_.push_back(best_goal_cost());
    }
    auto path = best_path();
    if (!path) {
      throw PlanningError(ErrorKind::kNoPathFound,
                          "iteration budget exhausted without reaching the goal");
    }
    return *path;
  }

  const std::vector<TreeNode>& tree() const { return nodes_; }

  /// Best goal-branch cost sampled every 100 iterations (infinity until the
  /// goal is first reached).
  const std::vector<double>& cost_history() const { return cost_history_; }

  double best_goal_cost() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t idx : goal_nodes_) {
      best = std::min(best, nodes_[idx].cost + distance(nodes_[idx].position, goal_));
    }
    return best;
  }

  std::optional<PlannedPath> best_path() const {
    std::optional<std::size_t> best_node;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t idx : goal_nodes_) {
      const double c = nodes_[idx].cost + distance(nodes_[idx].position, goal_);
      if (c < best) {
        best = c;
        best_node = idx;
      }
    }
    if (!best_node) return std::nullopt;

    PlannedPath path;
    path.cost = best;
    for (std::optional<std::size_t> n = best_node; n; n = nodes_[*n].parent) {
      path.vertices.push_back(nodes_[*n].position);
    }
    std::reverse(path.vertices.begin(), path.vertices.end());
    if (!(path.vertices.back() == goal_)) path.vertices.push_back(goal_);
    return path;
  }

 private:
  Vec2 sample() {
    if (unit_(rng_) < config_.goal_bias) return goal_;
    return {map_.x_min + unit_(rng_) * (map_.x_max - map_.x_min),
            map_.y_min + unit_(rng_) * (map_.y_max - map_.y_min)};
  }

  std::size_t nearest(Vec2 p) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const double d = distance(nodes_[i].position, p);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }

  Vec2 steer(Vec2 from, Vec2 to) const {
    const double d = distance(from, to);
    if (d <= config_.step_size) return to;
    return from + (config_.step_size / d) * (to - from);
  }

  double near_radius() const {
    const double n = static_cast<double>(nodes_.size());
    return std::min(config_.gamma * std::sqrt(std::log(n) / n),
                    2.0 * config_.step_size);
  }

  void iterate() {
    const Vec2 target = sample();
    const std::size_t nearest_idx = nearest(target);
    const Vec2 fresh = steer(nodes_[nearest_idx].position, target);
    if (fresh == nodes_[nearest_idx].position) return;
    if (!segment_free(nodes_[nearest_idx].position, fresh, map_, config_.inflate)) return;

    const double radius = near_radius();
    std::vector<std::size_t> near;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (distance(nodes_[i].position, fresh) <= radius) near.push_back(i);
    }

    std::size_t parent = nearest_idx;
    double best_cost = nodes_[nearest_idx].cost + distance(nodes_[nearest_idx].position, fresh);
    for (std::size_t i : near) {
      if (i == nearest_idx) continue;
      const double c = nodes_[i].cost + distance(nodes_[i].position, fresh);
      if (c < best_cost && segment_free(nodes_[i].position, fresh, map_, config_.inflate)) {
        parent = i;
        best_cost = c;
      }
    }

    const std::size_t fresh_idx = nodes_.size();
    nodes_.push_back({fresh, parent, best_cost, {}});
    nodes_[parent].children.push_back(fresh_idx);

    for (std::size_t i : near) {
      if (i == parent) continue;
      const double c = best_cost + distance(fresh, nodes_[i].position);
      if (c < nodes_[i].cost &&
          segment_free(fresh, nodes_[i].position, map_, config_.inflate)) {
        reparent(i, fresh_idx, c);
      }
    }

    if (distance(fresh, goal_) <= config_.goal_tolerance &&
        segment_free(fresh, goal_, map_, config_.inflate)) {
      goal_nodes_.push_back(fresh_idx);
    }
  }

  void reparent(std::size_t node, std::size_t new_parent, double new_cost) {
    auto& siblings = nodes_[*nodes_[node].parent].children;
    siblings.erase(std::find(siblings.begin(), siblings.end(), node));
    nodes_[node].parent = new_parent;
    nodes_[new_parent].children.push_back(node);
    const double delta = nodes_[node].cost - new_cost;
    std::vector<std::size_t> stack{node};
    while (!stack.empty()) {
      const std::size_t n = stack.back();
      stack.pop_back();
      nodes_[n].cost -= delta;
      stack.insert(stack.end(), nodes_[n].children.begin(), nodes_[n].children.end());
    }
    nodes_[node].cost = new_cost;
  }

  Vec2 start_;
  Vec2 goal_;
  WorldMap map_;
  PlannerConfig config_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::vector<TreeNode> nodes_;
  std::vector<std::size_t> goal_nodes_;
  std::vector<double> cost_history_;
};

inline PlannedPath plan_path(Vec2 start, Vec2 goal, const WorldMap& map,
                             const PlannerConfig& config) {
  RrtStar planner(start, goal, map, config);
  return planner.run();
}

/// Greedy shortcut simplification. From each anchor, jumps to the farthest
/// path vertex visible at `inflate`. The returned list excludes the start and
/// goal.
inline std::vector<Vec2> extract_waypoints(const PlannedPath& path,
                                           const WorldMap& map, double inflate) {
  std::vector<Vec2> waypoints;
  const auto& v = path.vertices;
  if (v.size() <= 2) return waypoints;
  std::size_t anchor = 0;
  while (anchor + 1 < v.size()) {
    std::size_t next = anchor + 1;
    for (std::size_t j = v.size() - 1; j > anchor + 1; --j) {
      if (segment_free(v[anchor], v[j], map, inflate)) {
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

}  // namespace asvplan
