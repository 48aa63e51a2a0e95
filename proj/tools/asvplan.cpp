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

// asvplan command-line front end.
//
//   asvplan plan --scenario s.yaml --out dir [--objective min-input|min-accel]
//                [--seed N] [--nodes K]
//   asvplan simulate --trajectory dir/trajectory.csv --scenario s.yaml --out dir
//   asvplan report --runs dir...
//
// Exit codes: 0 success, 1 invalid input, 2 front end failed, 3 a segment or
// its corridor could not be solved. Log verbosity comes from ASVPLAN_LOG.
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "asvplan/errors.hpp"
#include "asvplan/pipeline.hpp"
#include "asvplan/results_io.hpp"
#include "asvplan/scenario_io.hpp"
#include "asvplan/simulator.hpp"

namespace fs = std::filesystem;
using namespace asvplan;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput:
      return 1;
    case ErrorKind::kNoPathFound:
    case ErrorKind::kFrontEndFailed:
      return 2;
    default:
      return 3;
  }
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("asvplan");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("ASVPLAN_LOG");
  const std::string name = env ? env : "info";
  auto level = spdlog::level::from_str(name);
  if (level == spdlog::level::off && name != "off") level = spdlog::level::info;
  spdlog::set_level(level);
}

struct PlanArgs {
  std::string scenario;
  std::string out;
  std::string objective;
  std::optional<std::uint64_t> seed;
  std::optional<int> nodes;
};

int run_plan(const PlanArgs& args) {
  auto file = load_scenario(args.scenario);
  Scenario& s = file.scenario;
  if (!args.objective.empty()) s.objective = parse_objective_name(args.objective);
  if (args.seed) s.planner.rng_seed = *args.seed;
  if (args.nodes) s.nodes_per_segment = *args.nodes;
  s.validate();

  const auto traj = plan_trajectory(s);
  const auto rows = traj.sample();
  fs::create_directories(args.out);
  const fs::path out(args.out);
  write_trajectory_csv(out / "trajectory.csv", rows);
  write_waypoints_csv(out / "waypoints.csv", traj.waypoints);
  write_corridors_csv(out / "corridors.csv", traj.corridors);
  MetricsReport report{compute_metrics(rows, s.map), objective_name(s.objective), {}};
  for (const auto& seg : traj.segments) report.segment_durations.push_back(seg.duration());
  write_metrics_json(out / "metrics.json", report);
  write_svg(out / "plot.svg", render_svg(s.map, traj, rows));

  std::printf("objective %s: %zu segments, %zu waypoints, total time %.3f s\n",
              objective_name(s.objective), traj.segments.size(), traj.waypoints.size(),
              traj.total_duration());
  return 0;
}

int run_simulate(const std::string& trajectory, const std::string& scenario,
                 const std::string& out_dir) {
  const auto file = load_scenario(scenario);
  const auto plan = read_trajectory_csv(trajectory);
  const auto result = simulate(plan, file.scenario.vessel, file.scenario.map, file.sim);

  // Carry the objective label over from the plan's own report when present.
  MetricsReport report{result.metrics, objective_name(file.scenario.objective), {}};
  const fs::path plan_metrics = fs::path(trajectory).parent_path() / "metrics.json";
  if (fs::exists(plan_metrics)) {
    const auto planned = read_metrics_json(plan_metrics);
    report.objective = planned.objective;
    report.segment_durations = planned.segment_durations;
  }
  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  write_trajectory_csv(out / "simulated.csv", result.series);
  write_metrics_json(out / "metrics.json", report);

  const auto& m = result.metrics;
  std::printf(
      "avg_speed %.4f m/s, min_obstacle_distance %.4f m, avg_control_input %.4f N/s, "
      "total_time %.3f s, tracking_rmse %.4f m, terminal deviation %.4f m\n",
      m.avg_speed, m.min_obstacle_distance, m.avg_control_input, m.total_time,
      m.tracking_rmse, result.terminal_deviation);
  return 0;
}

int run_report(const std::vector<std::string>& runs) {
  std::vector<std::pair<std::string, MetricsReport>> rows;
  for (const auto& dir : runs) {
    const fs::path path = fs::path(dir) / "metrics.json";
    if (!fs::exists(path)) {
      throw PlanningError(ErrorKind::kInvalidInput, "no metrics.json in " + dir);
    }
    rows.emplace_back(dir, read_metrics_json(path));
  }
  std::printf("%-32s %-10s %10s %14s %12s %16s\n", "run", "objective", "time [s]",
              "speed [m/s]", "min dist [m]", "ctrl input [N/s]");
  for (const auto& [dir, r] : rows) {
    std::printf("%-32s %-10s %10.3f %14.4f %12.4f %16.4f\n", dir.c_str(),
                r.objective.c_str(), r.metrics.total_time, r.metrics.avg_speed,
                r.metrics.min_obstacle_distance, r.metrics.avg_control_input);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"ASV trajectory planner"};
  app.require_subcommand(1);

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "plan a trajectory for a scenario");
  plan_cmd->add_option("--scenario", plan.scenario, "scenario YAML file")->required();
  plan_cmd->add_option("--out", plan.out, "output directory")->required();
  plan_cmd->add_option("--objective", plan.objective, "min-input or min-accel")
      ->check(CLI::IsMember({"min-input", "min-accel"}));
  plan_cmd->add_option("--seed", plan.seed, "front-end random seed");
  plan_cmd->add_option("--nodes", plan.nodes, "collocation nodes per segment")
      ->check(CLI::Range(3, 1000));

  std::string trajectory;
  std::string sim_scenario;
  std::string sim_out;
  auto* sim_cmd = app.add_subcommand("simulate", "re-integrate a planned trajectory");
  sim_cmd->add_option("--trajectory", trajectory, "trajectory CSV")->required();
  sim_cmd->add_option("--scenario", sim_scenario, "scenario YAML file")->required();
  sim_cmd->add_option("--out", sim_out, "output directory")->required();

  std::vector<std::string> runs;
  auto* report_cmd = app.add_subcommand("report", "compare metrics across runs");
  report_cmd->add_option("--runs", runs, "run directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*plan_cmd) return run_plan(plan);
    if (*sim_cmd) return run_simulate(trajectory, sim_scenario, sim_out);
    return run_report(runs);
  } catch (const PlanningError& e) {
    std::fprintf(stderr, "error: kind=%s: %s\n", to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: kind=%s: %s\n", to_string(ErrorKind::kInvalidInput),
                 e.what());
    return 1;
  }
}
