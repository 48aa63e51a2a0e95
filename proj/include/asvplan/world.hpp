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

// Obstacle geometry, clearance queries and sailing-corridor extraction.
//
// Every obstacle is handled internally as a "rounded box": an axis-aligned
// core rectangle (possibly degenerate to a point) swept by a radius. A
// rectangle has radius 0, a circle has a point core. Inflating an obstacle by
// d just adds d to the radius, so clearance, segment checks and corridor
// expansion all see the same Minkowski-inflated shape.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "asvplan/errors.hpp"

namespace asvplan {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Vec2&) const = default;
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

struct AxisRect {
  double cx = 0.0;
  double cy = 0.0;
  double length = 1.0;  // x extent
  double width = 1.0;   // y extent
  bool operator==(const AxisRect&) const = default;
};

struct Circle {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 1.0;
  bool operator==(const Circle&) const = default;
};

using Obstacle = std::variant<AxisRect, Circle>;

/// Axis-aligned box; also the sailing-corridor type.
struct Box {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  bool operator==(const Box&) const = default;

  bool contains(Vec2 p, double tol = 0.0) const {
    return p.x >= x_min - tol && p.x <= x_max + tol && p.y >= y_min - tol &&
           p.y <= y_max + tol;
  }
};

using Corridor = Box;

struct WorldMap {
  double x_min = 0.0;
  double x_max = 20.0;
  double y_min = 0.0;
  double y_max = 20.0;
  std::vector<Obstacle> obstacles;
  double margin = 0.0;  // added to every inflation query

  bool operator==(const WorldMap&) const = default;

  Box bounds() const { return {x_min, x_max, y_min, y_max}; }

  void validate() const {
    if (!(x_min < x_max) || !(y_min < y_max)) {
      throw PlanningError(ErrorKind::kInvalidInput, "map bounds are degenerate");
    }
    if (!(margin >= 0.0)) {
      throw PlanningError(ErrorKind::kInvalidInput, "map margin must be >= 0");
    }
    for (const auto& obstacle : obstacles) {
      const bool ok = std::visit(
          [](const auto& o) {
            if constexpr (std::is_same_v<std::decay_t<decltype(o)>, AxisRect>) {
              return o.length > 0.0 && o.width > 0.0;
            } else {
              return o.radius > 0.0;
            }
          },
          obstacle);
      if (!ok) {
        throw PlanningError(ErrorKind::kInvalidInput,
                            "obstacle extents must be > 0");
      }
    }
  }
};

namespace detail {

struct RoundedBox {
  double x0, x1, y0, y1;  // core rectangle
  double radius;
};

inline RoundedBox to_rounded(const Obstacle& obstacle) {
  return std::visit(
      [](const auto& o) -> RoundedBox {
        if constexpr (std::is_same_v<std::decay_t<decltype(o)>, AxisRect>) {
          return {o.cx - 0.5 * o.length, o.cx + 0.5 * o.length,
                  o.cy - 0.5 * o.width, o.cy + 0.5 * o.width, 0.0};
        } else {
          return {o.cx, o.cx, o.cy, o.cy, o.radius};
        }
      },
      obstacle);
}

// Signed distance from p to the core rectangle.
inline double core_signed_distance(const RoundedBox& b, Vec2 p) {
  const double cx = 0.5 * (b.x0 + b.x1);
  const double cy = 0.5 * (b.y0 + b.y1);
  const double qx = std::abs(p.x - cx) - 0.5 * (b.x1 - b.x0);
  const double qy = std::abs(p.y - cy) - 0.5 * (b.y1 - b.y0);
  const double outside = std::hypot(std::max(qx, 0.0), std::max(qy, 0.0));
  const double inside = std::min(std::max(qx, qy), 0.0);
  return outside + inside;
}

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double s = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return distance(p, a + s * ab);
}

// Liang-Barsky clip of segment ab against the closed core rectangle.
inline bool segment_hits_core(const RoundedBox& b, Vec2 a, Vec2 c) {
  const Vec2 d = c - a;
  double t0 = 0.0;
  double t1 = 1.0;
  auto clip = [&](double p, double q) {
    if (p == 0.0) return q >= 0.0;
    const double r = q / p;
    if (p < 0.0) {
      if (r > t1) return false;
      t0 = std::max(t0, r);
    } else {
      if (r < t0) return false;
      t1 = std::min(t1, r);
    }
    return true;
  };
  return clip(-d.x, a.x - b.x0) && clip(d.x, b.x1 - a.x) &&
         clip(-d.y, a.y - b.y0) && clip(d.y, b.y1 - a.y);
}

// Unsigned distance from segment ac to the core rectangle (0 on contact).
inline double segment_core_distance(const RoundedBox& b, Vec2 a, Vec2 c) {
  if (segment_hits_core(b, a, c)) return 0.0;
  double best = std::min(std::max(core_signed_distance(b, a), 0.0),
                         std::max(core_signed_distance(b, c), 0.0));
  const Vec2 corners[4] = {{b.x0, b.y0}, {b.x1, b.y0}, {b.x0, b.y1},
                           {b.x1, b.y1}};
  for (const Vec2& corner : corners) {
    best = std::min(best, point_segment_distance(corner, a, c));
  }
  return best;
}

inline double interval_gap(double lo0, double hi0, double lo1, double hi1) {
  return std::max({0.0, lo1 - hi0, lo0 - hi1});
}

inline double box_core_distance(const Box& box, const RoundedBox& b) {
  return std::hypot(interval_gap(box.x_min, box.x_max, b.x0, b.x1),
                    interval_gap(box.y_min, box.y_max, b.y0, b.y1));
}

}  // namespace detail

inline constexpr double kNoObstacleClearance =
    std::numeric_limits<double>::infinity();

/// Signed distance from p to the nearest obstacle boundary (negative inside).
/// Map bounds do not count. Returns kNoObstacleClearance for an empty map.
inline double clearance(Vec2 p, const WorldMap& map) {
  double best = kNoObstacleClearance;
  for (const auto& obstacle : map.obstacles) {
    const auto b = detail::to_rounded(obstacle);
    best = std::min(best, detail::core_signed_distance(b, p) - b.radius);
  }
  return best;
}

inline bool within_bounds(Vec2 p, const WorldMap& map, double inflate) {
  return p.x >= map.x_min + inflate && p.x <= map.x_max - inflate &&
         p.y >= map.y_min + inflate && p.y <= map.y_max - inflate;
}

inline bool is_free(Vec2 p, const WorldMap& map, double inflate) {
  const double d = inflate + map.margin;
  return within_bounds(p, map, d) && clearance(p, map) > d;
}

/// Exact check that every point of segment ab keeps clearance > inflate.
inline bool segment_free(Vec2 a, Vec2 b, const WorldMap& map, double inflate) {
  const double d = inflate + map.margin;
  if (!within_bounds(a, map, d) || !within_bounds(b, map, d)) return false;
  for (const auto& obstacle : map.obstacles) {
    const auto core = detail::to_rounded(obstacle);
    if (detail::segment_core_distance(core, a, b) - core.radius <= d) {
      return false;
    }
  }
  return true;
}

/// True when no point of `box` is strictly closer than `inflate` to an
/// obstacle. Touching the inflated boundary is allowed.
inline bool box_free(const Box& box, const WorldMap& map, double inflate) {
  const double d = inflate + map.margin;
  for (const auto& obstacle : map.obstacles) {
    const auto core = detail::to_rounded(obstacle);
    // Overlapping interiors block even when the inflated radius is zero.
    const bool overlap = std::min(box.x_max, core.x1) > std::max(box.x_min, core.x0) &&
                         std::min(box.y_max, core.y1) > std::max(box.y_min, core.y0);
    if (overlap || detail::box_core_distance(box, core) < core.radius + d) return false;
  }
  return true;
}

/// Largest axis-aligned box grown greedily from the bounding box of a and b.
///
/// Sides are pushed outward in the order x_min, x_max, y_min, y_max, each one
/// directly onto the nearest inflated obstacle or the map bound shrunk by the
/// inflation, repeating until no side moves. Throws SeedBoxBlocked when the
/// bounding box of the endpoints already touches an inflated obstacle.
inline Corridor compute_corridor(Vec2 a, Vec2 b, const WorldMap& map,
                                 double inflate) {
  const double d = inflate + map.margin;
  Box box{std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y),
          std::max(a.y, b.y)};
  const Box limits{map.x_min + d, map.x_max - d, map.y_min + d, map.y_max - d};
  if (!limits.contains(a) || !limits.contains(b) || !box_free(box, map, inflate)) {
    throw PlanningError(ErrorKind::kSeedBoxBlocked,
                        "bounding box of the segment endpoints is not free");
  }

  std::vector<detail::RoundedBox> cores;
  cores.reserve(map.obstacles.size());
  for (const auto& obstacle : map.obstacles) {
    auto core = detail::to_rounded(obstacle);
    core.radius += d;
    cores.push_back(core);
  }

  // How far a side may travel before touching `core`, given the gap to the
  // core along the perpendicular axis. Returns NaN when it never touches;
  // overlapping extents always block, even for a sharp-cornered core.
  auto reach = [](double perpendicular_gap, double radius) {
    if (perpendicular_gap > 0.0 && perpendicular_gap >= radius) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    return std::sqrt(radius * radius - perpendicular_gap * perpendicular_gap);
  };

  for (int round = 0; round < 8; ++round) {
    const Box before = box;

    double x_lo = limits.x_min;
    double x_hi = limits.x_max;
    for (const auto& c : cores) {
      const double r = reach(detail::interval_gap(box.y_min, box.y_max, c.y0, c.y1), c.radius);
      if (std::isnan(r)) continue;
      if (c.x1 <= box.x_min) x_lo = std::max(x_lo, c.x1 + r);
    }
    box.x_min = std::min(box.x_min, x_lo);
    for (const auto& c : cores) {
      const double r = reach(detail::interval_gap(box.y_min, box.y_max, c.y0, c.y1), c.radius);
      if (std::isnan(r)) continue;
      if (c.x0 >= box.x_max) x_hi = std::min(x_hi, c.x0 - r);
    }
    box.x_max = std::max(box.x_max, x_hi);

    double y_lo = limits.y_min;
    double y_hi = limits.y_max;
    for (const auto& c : cores) {
      const double r = reach(detail::interval_gap(box.x_min, box.x_max, c.x0, c.x1), c.radius);
      if (std::isnan(r)) continue;
      if (c.y1 <= box.y_min) y_lo = std::max(y_lo, c.y1 + r);
    }
    box.y_min = std::min(box.y_min, y_lo);
    for (const auto& c : cores) {
      const double r = reach(detail::interval_gap(box.x_min, box.x_max, c.x0, c.x1), c.radius);
      if (std::isnan(r)) continue;
      if (c.y0 >= box.y_max) y_hi = std::min(y_hi, c.y0 - r);
    }
    box.y_max = std::max(box.y_max, y_hi);

    if (box == before) break;
  }

  if (!(box.x_min < box.x_max) || !(box.y_min < box.y_max)) {
    throw PlanningError(ErrorKind::kSeedBoxBlocked,
                        "corridor could not grow to a non-degenerate box");
  }
  return box;
}

inline double min_trajectory_clearance(std::span<const Vec2> samples,
                                       const WorldMap& map) {
  double best = kNoObstacleClearance;
  for (Vec2 p : samples) best = std::min(best, clearance(p, map));
  return best;
}

}  // namespace asvplan
