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

// Run artifacts: trajectory/waypoint/corridor CSV files, the metrics report and
// an overhead SVG plot.
#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "asvplan/errors.hpp"
#include "asvplan/pipeline.hpp"
#include "asvplan/simulator.hpp"
#include "asvplan/world.hpp"

namespace asvplan {

inline constexpr std::string_view kTrajectoryHeader =
    "t,x,y,psi,u,v,r,du,dv,dr,tau_u,tau_r,F1,F2,segment";

namespace detail {

inline std::string fixed6(double value) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.6f", value);
  // Avoid "-0.000000".
  std::string s(buf.data());
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    const auto comma = line.find(',', begin);
    fields.push_back(line.substr(begin, comma - begin));
    if (comma == std::string_view::npos) break;
    begin = comma + 1;
  }
  return fields;
}

[[noreturn]] inline void csv_fail(const std::string& source, std::size_t line,
                                  const std::string& message) {
  throw PlanningError(ErrorKind::kInvalidInput,
                      source + ":" + std::to_string(line) + ": " + message);
}

inline double parse_double(std::string_view field, const std::string& source,
                           std::size_t line) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    csv_fail(source, line, "bad number '" + std::string(field) + "'");
  }
  return value;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PlanningError(ErrorKind::kInvalidInput, "cannot open " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw PlanningError(ErrorKind::kInvalidInput, "cannot write " + path.string());
  return out;
}

}  // namespace detail

inline std::string format_trajectory_csv(std::span<const TrajectorySample> rows) {
  std::string out(kTrajectoryHeader);
  out += '\n';
  for (const auto& s : rows) {
    for (double value : {s.t, s.pose.x, s.pose.y, s.pose.psi, s.vel.u, s.vel.v, s.vel.r,
                         s.acc.du, s.acc.dv, s.acc.dr, s.tau.tau_u, s.tau.tau_r,
                         s.forces.port, s.forces.starboard}) {
      out += detail::fixed6(value);
      out += ',';
    }
    out += std::to_string(s.segment);
    out += '\n';
  }
  return out;
}

inline void write_trajectory_csv(const std::filesystem::path& path,
                                 std::span<const TrajectorySample> rows) {
  detail::open_output(path) << format_trajectory_csv(rows);
}

/// Strict reader: exact header, 15 fields per row, t strictly increasing and
/// segment index non-decreasing.
inline std::vector<TrajectorySample> read_trajectory_csv(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  const std::string source = path.string();
  if (lines.empty() || lines.front() != kTrajectoryHeader) {
    detail::csv_fail(source, 1, "expected header '" + std::string(kTrajectoryHeader) + "'");
  }
  std::vector<TrajectorySample> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (lines[i].empty()) continue;
    const auto f = detail::split_fields(lines[i]);
    if (f.size() != 15) detail::csv_fail(source, line, "expected 15 fields");
    std::array<double, 14> v{};
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = detail::parse_double(f[j], source, line);
    int segment = 0;
    const auto [ptr, ec] =
        std::from_chars(f[14].data(), f[14].data() + f[14].size(), segment);
    if (ec != std::errc{} || ptr != f[14].data() + f[14].size() || segment < 0) {
      detail::csv_fail(source, line, "bad segment index '" + std::string(f[14]) + "'");
    }
    TrajectorySample s{v[0],
                       {v[1], v[2], v[3]},
                       {v[4], v[5], v[6]},
                       {v[7], v[8], v[9]},
                       {v[10], v[11]},
                       {v[12], v[13]},
                       segment};
    if (!rows.empty()) {
      if (!(s.t > rows.back().t)) detail::csv_fail(source, line, "t must strictly increase");
      if (s.segment < rows.back().segment) {
        detail::csv_fail(source, line, "segment index must not decrease");
      }
    }
    rows.push_back(s);
  }
  if (rows.empty()) detail::csv_fail(source, lines.size(), "no trajectory rows");
  return rows;
}

inline void write_waypoints_csv(const std::filesystem::path& path,
                                std::span<const Vec2> waypoints) {
  auto out = detail::open_output(path);
  out << "index,x,y\n";
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    out << i << ',' << detail::fixed6(waypoints[i].x) << ','
        << detail::fixed6(waypoints[i].y) << '\n';
  }
}

inline std::vector<Vec2> read_waypoints_csv(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  const std::string source = path.string();
  if (lines.empty() || lines.front() != "index,x,y") {
    detail::csv_fail(source, 1, "expected header 'index,x,y'");
  }
  std::vector<Vec2> points;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = detail::split_fields(lines[i]);
    if (f.size() != 3) detail::csv_fail(source, i + 1, "expected 3 fields");
    points.push_back({detail::parse_double(f[1], source, i + 1),
                      detail::parse_double(f[2], source, i + 1)});
  }
  return points;
}

inline void write_corridors_csv(const std::filesystem::path& path,
                                std::span<const Corridor> corridors) {
  auto out = detail::open_output(path);
  out << "segment,x_min,x_max,y_min,y_max\n";
  for (std::size_t i = 0; i < corridors.size(); ++i) {
    const auto& c = corridors[i];
    out << i << ',' << detail::fixed6(c.x_min) << ',' << detail::fixed6(c.x_max) << ','
        << detail::fixed6(c.y_min) << ',' << detail::fixed6(c.y_max) << '\n';
  }
}

inline std::vector<Corridor> read_corridors_csv(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  const std::string source = path.string();
  if (lines.empty() || lines.front() != "segment,x_min,x_max,y_min,y_max") {
    detail::csv_fail(source, 1, "expected header 'segment,x_min,x_max,y_min,y_max'");
  }
  std::vector<Corridor> boxes;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = detail::split_fields(lines[i]);
    if (f.size() != 5) detail::csv_fail(source, i + 1, "expected 5 fields");
    boxes.push_back({detail::parse_double(f[1], source, i + 1),
                     detail::parse_double(f[2], source, i + 1),
                     detail::parse_double(f[3], source, i + 1),
                     detail::parse_double(f[4], source, i + 1)});
  }
  return boxes;
}

/// Metrics plus run context. An unbounded obstacle distance (empty map) is
/// stored as null.
struct MetricsReport {
  Metrics metrics;
  std::string objective;
  std::vector<double> segment_durations;
};

inline nlohmann::json to_json(const MetricsReport& report) {
  const Metrics& m = report.metrics;
  nlohmann::json j;
  j["objective"] = report.objective;
  j["avg_speed"] = m.avg_speed;
  j["min_obstacle_distance"] = std::isfinite(m.min_obstacle_distance)
                                   ? nlohmann::json(m.min_obstacle_distance)
                                   : nlohmann::json(nullptr);
  j["avg_control_input"] = m.avg_control_input;
  j["total_time"] = m.total_time;
  j["tracking_rmse"] = m.tracking_rmse;
  j["segment_durations"] = report.segment_durations;
  return j;
}

inline void write_metrics_json(const std::filesystem::path& path,
                               const MetricsReport& report) {
  detail::open_output(path) << to_json(report).dump(2) << '\n';
}

inline MetricsReport read_metrics_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PlanningError(ErrorKind::kInvalidInput, "cannot open " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    MetricsReport r;
    r.objective = j.value("objective", std::string());
    r.metrics.avg_speed = j.at("avg_speed").get<double>();
    const auto& d = j.at("min_obstacle_distance");
    r.metrics.min_obstacle_distance = d.is_null() ? kNoObstacleClearance : d.get<double>();
    r.metrics.avg_control_input = j.at("avg_control_input").get<double>();
    r.metrics.total_time = j.at("total_time").get<double>();
    r.metrics.tracking_rmse = j.value("tracking_rmse", 0.0);
    r.segment_durations = j.value("segment_durations", std::vector<double>{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw PlanningError(ErrorKind::kInvalidInput, path.string() + ": " + e.what());
  }
}

/// Overhead view: obstacles, corridors, front-end path, waypoints and the
/// trajectory with heading arrows. Output depends only on the inputs.
inline std::string render_svg(const WorldMap& map, const FullTrajectory& traj,
                              std::span<const TrajectorySample> rows) {
  constexpr double kScale = 30.0;
  constexpr double kPad = 20.0;
  const double width = (map.x_max - map.x_min) * kScale + 2 * kPad;
  const double height = (map.y_max - map.y_min) * kScale + 2 * kPad;
  auto px = [&](double x) { return detail::fixed6(kPad + (x - map.x_min) * kScale); };
  auto py = [&](double y) { return detail::fixed6(kPad + (map.y_max - y) * kScale); };
  auto len = [&](double d) { return detail::fixed6(d * kScale); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fixed6(width)
      << "\" height=\"" << detail::fixed6(height) << "\">\n";
  svg << "<rect x=\"" << px(map.x_min) << "\" y=\"" << py(map.y_max) << "\" width=\""
      << len(map.x_max - map.x_min) << "\" height=\"" << len(map.y_max - map.y_min)
      << "\" fill=\"white\" stroke=\"black\"/>\n";
  for (const auto& c : traj.corridors) {
    svg << "<rect x=\"" << px(c.x_min) << "\" y=\"" << py(c.y_max) << "\" width=\""
        << len(c.x_max - c.x_min) << "\" height=\"" << len(c.y_max - c.y_min)
        << "\" fill=\"steelblue\" fill-opacity=\"0.12\" stroke=\"steelblue\"/>\n";
  }
  for (const auto& obstacle : map.obstacles) {
    if (const auto* r = std::get_if<AxisRect>(&obstacle)) {
      svg << "<rect x=\"" << px(r->cx - 0.5 * r->length) << "\" y=\""
          << py(r->cy + 0.5 * r->width) << "\" width=\"" << len(r->length)
          << "\" height=\"" << len(r->width) << "\" fill=\"dimgray\"/>\n";
    } else {
      const auto& c = std::get<Circle>(obstacle);
      svg << "<circle cx=\"" << px(c.cx) << "\" cy=\"" << py(c.cy) << "\" r=\""
          << len(c.radius) << "\" fill=\"dimgray\"/>\n";
    }
  }
  if (!traj.front_end_path.empty()) {
    svg << "<polyline fill=\"none\" stroke=\"gray\" stroke-dasharray=\"4 3\" points=\"";
    for (const auto& p : traj.front_end_path) svg << px(p.x) << ',' << py(p.y) << ' ';
    svg << "\"/>\n";
  }
  if (!rows.empty()) {
    svg << "<polyline fill=\"none\" stroke=\"crimson\" stroke-width=\"2\" points=\"";
    for (const auto& s : rows) svg << px(s.pose.x) << ',' << py(s.pose.y) << ' ';
    svg << "\"/>\n";
    const std::size_t stride = std::max<std::size_t>(1, rows.size() / 40);
    for (std::size_t i = 0; i < rows.size(); i += stride) {
      const auto& p = rows[i].pose;
      const double tip_x = p.x + 0.4 * std::cos(p.psi);
      const double tip_y = p.y + 0.4 * std::sin(p.psi);
      svg << "<line x1=\"" << px(p.x) << "\" y1=\"" << py(p.y) << "\" x2=\"" << px(tip_x)
          << "\" y2=\"" << py(tip_y) << "\" stroke=\"darkred\"/>\n";
    }
  }
  for (const auto& w : traj.waypoints) {
    svg << "<circle cx=\"" << px(w.x) << "\" cy=\"" << py(w.y)
        << "\" r=\"4\" fill=\"black\"/>\n";
  }
  if (!rows.empty()) {
    for (const auto* s : {&rows.front(), &rows.back()}) {
      svg << "<circle cx=\"" << px(s->pose.x) << "\" cy=\"" << py(s->pose.y)
          << "\" r=\"6\" fill=\"none\" stroke=\"forestgreen\" stroke-width=\"2\"/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

inline void write_svg(const std::filesystem::path& path, const std::string& svg) {
  detail::open_output(path) << svg;
}

}  // namespace asvplan
