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

// YAML scenario files. Every section except map, start and goal is optional
// and falls back to the library defaults. Unknown keys are rejected.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>

#include <yaml-cpp/yaml.h>

#include "asvplan/errors.hpp"
#include "asvplan/pipeline.hpp"
#include "asvplan/simulator.hpp"

namespace asvplan {

struct ScenarioFile {
  Scenario scenario;
  SimConfig sim;

  bool operator==(const ScenarioFile&) const = default;
};

inline const char* objective_name(ObjectiveKind kind) {
  return kind == ObjectiveKind::kMinControlInput ? "min-input" : "min-accel";
}

inline ObjectiveKind parse_objective_name(std::string_view name) {
  if (name == "min-input") return ObjectiveKind::kMinControlInput;
  if (name == "min-accel") return ObjectiveKind::kMinAcceleration;
  throw PlanningError(ErrorKind::kInvalidInput,
                      "objective must be min-input or min-accel, got '" +
                          std::string(name) + "'");
}

namespace detail {

class ScenarioReader {
 public:
  explicit ScenarioReader(std::string source) : source_(std::move(source)) {}

  ScenarioFile read(const YAML::Node& root) const {
    if (!root.IsMap()) fail(root, "top level must be a mapping");
    keys(root, {"map", "vessel", "start", "goal", "bounds", "objective", "planner",
                "solver", "nodes_per_segment", "sim"});
    ScenarioFile file;
    Scenario& s = file.scenario;
    read_map(section(root, "map", true), s.map);
    read_vessel(section(root, "vessel", false), s.vessel);
    s.start = read_pose(section(root, "start", true));
    s.goal = read_pose(section(root, "goal", true));
    read_bounds(section(root, "bounds", false), s.bounds);
    read_objective(section(root, "objective", false), s);
    read_planner(section(root, "planner", false), s.planner);
    read_solver(section(root, "solver", false), s.solver);
    if (root["nodes_per_segment"]) {
      s.nodes_per_segment = scalar<int>(root["nodes_per_segment"], "nodes_per_segment");
      check(root["nodes_per_segment"], s.nodes_per_segment >= 3,
            "nodes_per_segment must be >= 3");
    }
    if (const auto sim = section(root, "sim", false)) {
      keys(sim, {"dt"});
      number(sim, "dt", file.sim.dt);
      at(sim, [&] { file.sim.validate(); });
    }
    at(root["start"], [&] {
      if (!is_free({s.start.x, s.start.y}, s.map, s.vessel.hull_radius)) {
        throw PlanningError(ErrorKind::kInvalidInput,
                            "start position is not free at hull inflation");
      }
    });
    at(root["goal"], [&] {
      if (!is_free({s.goal.x, s.goal.y}, s.map, s.vessel.hull_radius)) {
        throw PlanningError(ErrorKind::kInvalidInput,
                            "goal position is not free at hull inflation");
      }
    });
    at(root, [&] { s.validate(); });
    return file;
  }

 private:
  std::string source_;

  [[noreturn]] void fail_at(const YAML::Mark& mark, const std::string& message) const {
    std::string where = source_;
    if (!mark.is_null()) where += ":" + std::to_string(mark.line + 1);
    throw PlanningError(ErrorKind::kInvalidInput, where + ": " + message);
  }

  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
    fail_at(node.Mark(), message);
  }

  void check(const YAML::Node& node, bool ok, const std::string& message) const {
    if (!ok) fail(node, message);
  }

  // Runs a validator and re-raises its message at `node`'s line.
  void at(const YAML::Node& node, const std::function<void()>& validate) const {
    try {
      validate();
    } catch (const PlanningError& e) {
      fail(node, e.what());
    }
  }

  void keys(const YAML::Node& node, std::initializer_list<std::string_view> allowed) const {
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      bool known = false;
      for (auto a : allowed) known = known || key == a;
      if (!known) fail(kv.first, "unknown key '" + key + "'");
    }
  }

  YAML::Node section(const YAML::Node& parent, const char* key, bool required) const {
    const YAML::Node node = parent[key];
    if (!node) {
      if (required) fail(parent, std::string("missing section '") + key + "'");
      return node;
    }
    if (!node.IsMap()) fail(node, std::string("'") + key + "' must be a mapping");
    return node;
  }

  template <typename T>
  T scalar(const YAML::Node& node, std::string_view what = {}) const {
    const std::string prefix = what.empty() ? std::string() : std::string(what) + ": ";
    if (!node.IsScalar()) fail(node, prefix + "expected a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, prefix + "cannot parse '" + node.Scalar() + "'");
    }
  }

  void number(const YAML::Node& parent, const char* key, double& out) const {
    if (const YAML::Node node = parent[key]) {
      out = scalar<double>(node, key);
      check(node, std::isfinite(out), std::string(key) + " must be finite");
    }
  }

  void range(const YAML::Node& parent, const char* key, double& lo, double& hi) const {
    const YAML::Node node = parent[key];
    if (!node) return;
    check(node, node.IsSequence() && node.size() == 2,
          std::string(key) + " must be a [lo, hi] pair");
    lo = scalar<double>(node[0], key);
    hi = scalar<double>(node[1], key);
    check(node, std::isfinite(lo) && std::isfinite(hi) && lo <= hi,
          std::string(key) + " must satisfy lo <= hi");
  }

  Vec2 point(const YAML::Node& node) const {
    check(node, node.IsSequence() && node.size() == 2, "expected an [x, y] pair");
    return {scalar<double>(node[0]), scalar<double>(node[1])};
  }

  void read_map(const YAML::Node& node, WorldMap& map) const {
    keys(node, {"x_bounds", "y_bounds", "margin", "obstacles"});
    range(node, "x_bounds", map.x_min, map.x_max);
    range(node, "y_bounds", map.y_min, map.y_max);
    number(node, "margin", map.margin);
    if (const YAML::Node list = node["obstacles"]) {
      check(list, list.IsSequence(), "obstacles must be a list");
      for (const auto& item : list) {
        check(item, item.IsMap(), "obstacle must be a mapping");
        const YAML::Node type = item["type"];
        check(item, static_cast<bool>(type), "obstacle needs a type");
        const auto kind = scalar<std::string>(type);
        if (kind == "rect") {
          keys(item, {"type", "center", "length", "width"});
          check(item, item["center"] && item["length"] && item["width"],
                "rect needs center, length and width");
          const Vec2 c = point(item["center"]);
          AxisRect rect{c.x, c.y, scalar<double>(item["length"], "length"),
                        scalar<double>(item["width"], "width")};
          check(item, rect.length > 0.0 && rect.width > 0.0,
                "rect length and width must be > 0");
          map.obstacles.emplace_back(rect);
        } else if (kind == "circle") {
          keys(item, {"type", "center", "radius"});
          check(item, item["center"] && item["radius"], "circle needs center and radius");
          const Vec2 c = point(item["center"]);
          Circle circle{c.x, c.y, scalar<double>(item["radius"], "radius")};
          check(item, circle.radius > 0.0, "circle radius must be > 0");
          map.obstacles.emplace_back(circle);
        } else {
          fail(type, "obstacle type must be rect or circle, got '" + kind + "'");
        }
      }
    }
    at(node, [&] { map.validate(); });
  }

  void read_vessel(const YAML::Node& node, VesselParams& v) const {
    if (!node) return;
    keys(node, {"m", "Iz", "Xu", "Yv", "Nr", "b", "hull_radius"});
    number(node, "m", v.mass);
    number(node, "Iz", v.inertia_z);
    number(node, "Xu", v.damping_surge);
    number(node, "Yv", v.damping_sway);
    number(node, "Nr", v.damping_yaw);
    number(node, "b", v.half_width);
    number(node, "hull_radius", v.hull_radius);
    at(node, [&] { v.validate(); });
  }

  Pose read_pose(const YAML::Node& node) const {
    keys(node, {"x", "y", "psi"});
    check(node, node["x"] && node["y"], "pose needs x and y");
    Pose pose;
    number(node, "x", pose.x);
    number(node, "y", pose.y);
    number(node, "psi", pose.psi);
    return pose;
  }

  void read_bounds(const YAML::Node& node, BoundSet& b) const {
    if (!node) return;
    keys(node, {"t_max", "u", "v", "r", "psi", "acc", "tau"});
    number(node, "t_max", b.t_max);
    check(node, b.t_max > 0.0, "t_max must be > 0");
    range(node, "u", b.vel_lo.u, b.vel_hi.u);
    range(node, "v", b.vel_lo.v, b.vel_hi.v);
    range(node, "r", b.vel_lo.r, b.vel_hi.r);
    range(node, "psi", b.psi_lo, b.psi_hi);
    if (const auto acc = section(node, "acc", false)) {
      keys(acc, {"du", "dv", "dr"});
      range(acc, "du", b.acc_lo.du, b.acc_hi.du);
      range(acc, "dv", b.acc_lo.dv, b.acc_hi.dv);
      range(acc, "dr", b.acc_lo.dr, b.acc_hi.dr);
    }
    if (const auto tau = section(node, "tau", false)) {
      keys(tau, {"tau_u", "tau_r"});
      range(tau, "tau_u", b.tau_lo.tau_u, b.tau_hi.tau_u);
      range(tau, "tau_r", b.tau_lo.tau_r, b.tau_hi.tau_r);
    }
    at(node, [&] { b.validate(); });
  }

  void read_objective(const YAML::Node& node, Scenario& s) const {
    if (!node) return;
    keys(node, {"kind", "lambda_input", "lambda_accel"});
    if (node["kind"]) {
      at(node["kind"], [&] {
        s.objective = parse_objective_name(scalar<std::string>(node["kind"]));
      });
    }
    number(node, "lambda_input", s.lambda_input);
    number(node, "lambda_accel", s.lambda_accel);
    check(node, s.lambda_input >= 0.0 && s.lambda_accel >= 0.0,
          "objective weights must be >= 0");
  }

  void read_planner(const YAML::Node& node, PlannerConfig& p) const {
    if (!node) return;
    keys(node, {"seed", "max_iterations", "step_size", "goal_bias", "gamma",
                "goal_tolerance", "inflate"});
    if (node["seed"]) p.rng_seed = scalar<std::uint64_t>(node["seed"], "seed");
    if (node["max_iterations"]) p.max_iterations = scalar<int>(node["max_iterations"], "max_iterations");
    number(node, "step_size", p.step_size);
    number(node, "goal_bias", p.goal_bias);
    number(node, "gamma", p.gamma);
    number(node, "goal_tolerance", p.goal_tolerance);
    number(node, "inflate", p.inflate);
    at(node, [&] { p.validate(); });
  }

  void read_solver(const YAML::Node& node, SolverConfig& c) const {
    if (!node) return;
    keys(node, {"max_outer_iterations", "max_inner_iterations", "constraint_tolerance",
                "optimality_tolerance", "initial_penalty", "penalty_growth",
                "max_penalty", "memory"});
    if (node["max_outer_iterations"]) {
      c.max_outer_iterations = scalar<int>(node["max_outer_iterations"], "max_outer_iterations");
    }
    if (node["max_inner_iterations"]) {
      c.max_inner_iterations = scalar<int>(node["max_inner_iterations"], "max_inner_iterations");
    }
    number(node, "constraint_tolerance", c.constraint_tolerance);
    number(node, "optimality_tolerance", c.optimality_tolerance);
    number(node, "initial_penalty", c.initial_penalty);
    number(node, "penalty_growth", c.penalty_growth);
    number(node, "max_penalty", c.max_penalty);
    if (node["memory"]) c.memory = scalar<int>(node["memory"], "memory");
    at(node, [&] { c.validate(); });
  }
};

inline void emit_range(YAML::Emitter& out, const char* key, double lo, double hi) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq << lo << hi
      << YAML::EndSeq;
}

inline void emit_pose(YAML::Emitter& out, const char* key, const Pose& p) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "x" << YAML::Value << p.x;
  out << YAML::Key << "y" << YAML::Value << p.y;
  out << YAML::Key << "psi" << YAML::Value << p.psi;
  out << YAML::EndMap;
}

}  // namespace detail

/// Parses scenario text; `source` names the document in error messages.
inline ScenarioFile parse_scenario(const std::string& text,
                                   const std::string& source = "<scenario>") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw PlanningError(ErrorKind::kInvalidInput,
                        source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return detail::ScenarioReader(source).read(root);
}

inline ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw PlanningError(ErrorKind::kInvalidInput, "cannot open " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path.string());
}

/// Writes every field, so loading the result reproduces `file` exactly.
inline std::string dump_scenario(const ScenarioFile& file) {
  const Scenario& s = file.scenario;
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;

  out << YAML::Key << "map" << YAML::Value << YAML::BeginMap;
  detail::emit_range(out, "x_bounds", s.map.x_min, s.map.x_max);
  detail::emit_range(out, "y_bounds", s.map.y_min, s.map.y_max);
  out << YAML::Key << "margin" << YAML::Value << s.map.margin;
  out << YAML::Key << "obstacles" << YAML::Value << YAML::BeginSeq;
  for (const auto& obstacle : s.map.obstacles) {
    out << YAML::Flow << YAML::BeginMap;
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          out << YAML::Key << "type" << YAML::Value
              << (std::is_same_v<T, AxisRect> ? "rect" : "circle");
          out << YAML::Key << "center" << YAML::Value << YAML::Flow << YAML::BeginSeq
              << o.cx << o.cy << YAML::EndSeq;
          if constexpr (std::is_same_v<T, AxisRect>) {
            out << YAML::Key << "length" << YAML::Value << o.length;
            out << YAML::Key << "width" << YAML::Value << o.width;
          } else {
            out << YAML::Key << "radius" << YAML::Value << o.radius;
          }
        },
        obstacle);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;

  const VesselParams& v = s.vessel;
  out << YAML::Key << "vessel" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "m" << YAML::Value << v.mass;
  out << YAML::Key << "Iz" << YAML::Value << v.inertia_z;
  out << YAML::Key << "Xu" << YAML::Value << v.damping_surge;
  out << YAML::Key << "Yv" << YAML::Value << v.damping_sway;
  out << YAML::Key << "Nr" << YAML::Value << v.damping_yaw;
  out << YAML::Key << "b" << YAML::Value << v.half_width;
  out << YAML::Key << "hull_radius" << YAML::Value << v.hull_radius;
  out << YAML::EndMap;

  detail::emit_pose(out, "start", s.start);
  detail::emit_pose(out, "goal", s.goal);

  const BoundSet& b = s.bounds;
  out << YAML::Key << "bounds" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "t_max" << YAML::Value << b.t_max;
  detail::emit_range(out, "u", b.vel_lo.u, b.vel_hi.u);
  detail::emit_range(out, "v", b.vel_lo.v, b.vel_hi.v);
  detail::emit_range(out, "r", b.vel_lo.r, b.vel_hi.r);
  detail::emit_range(out, "psi", b.psi_lo, b.psi_hi);
  out << YAML::Key << "acc" << YAML::Value << YAML::BeginMap;
  detail::emit_range(out, "du", b.acc_lo.du, b.acc_hi.du);
  detail::emit_range(out, "dv", b.acc_lo.dv, b.acc_hi.dv);
  detail::emit_range(out, "dr", b.acc_lo.dr, b.acc_hi.dr);
  out << YAML::EndMap;
  out << YAML::Key << "tau" << YAML::Value << YAML::BeginMap;
  detail::emit_range(out, "tau_u", b.tau_lo.tau_u, b.tau_hi.tau_u);
  detail::emit_range(out, "tau_r", b.tau_lo.tau_r, b.tau_hi.tau_r);
  out << YAML::EndMap << YAML::EndMap;

  out << YAML::Key << "objective" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << objective_name(s.objective);
  out << YAML::Key << "lambda_input" << YAML::Value << s.lambda_input;
  out << YAML::Key << "lambda_accel" << YAML::Value << s.lambda_accel;
  out << YAML::EndMap;

  const PlannerConfig& p = s.planner;
  out << YAML::Key << "planner" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << p.rng_seed;
  out << YAML::Key << "max_iterations" << YAML::Value << p.max_iterations;
  out << YAML::Key << "step_size" << YAML::Value << p.step_size;
  out << YAML::Key << "goal_bias" << YAML::Value << p.goal_bias;
  out << YAML::Key << "gamma" << YAML::Value << p.gamma;
  out << YAML::Key << "goal_tolerance" << YAML::Value << p.goal_tolerance;
  out << YAML::Key << "inflate" << YAML::Value << p.inflate;
  out << YAML::EndMap;

  const SolverConfig& c = s.solver;
  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "max_outer_iterations" << YAML::Value << c.max_outer_iterations;
  out << YAML::Key << "max_inner_iterations" << YAML::Value << c.max_inner_iterations;
  out << YAML::Key << "constraint_tolerance" << YAML::Value << c.constraint_tolerance;
  out << YAML::Key << "optimality_tolerance" << YAML::Value << c.optimality_tolerance;
  out << YAML::Key << "initial_penalty" << YAML::Value << c.initial_penalty;
  out << YAML::Key << "penalty_growth" << YAML::Value << c.penalty_growth;
  out << YAML::Key << "max_penalty" << YAML::Value << c.max_penalty;
  out << YAML::Key << "memory" << YAML::Value << c.memory;
  out << YAML::EndMap;

  out << YAML::Key << "nodes_per_segment" << YAML::Value << s.nodes_per_segment;
  out << YAML::Key << "sim" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "dt" << YAML::Value << file.sim.dt;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

inline void save_scenario(const ScenarioFile& file, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw PlanningError(ErrorKind::kInvalidInput, "cannot write " + path.string());
  out << dump_scenario(file);
}

}  // namespace asvplan
