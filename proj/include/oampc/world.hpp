#pragma once

#include <vector>

#include "oampc/geometry.hpp"

namespace oampc {

/// Static map seen by the range sensor: convex solid obstacles and free-standing walls.
struct World {
  std::vector<ConvexPolygond> obstacles;
  std::vector<Segmentd> walls;

  /// Every edge the sensor can hit, walls first.
  std::vector<Segmentd> segments() const {
    std::vector<Segmentd> out = walls;
    for (const auto& poly : obstacles) {
      for (std::size_t i = 0; i < poly.vertices().size(); ++i) out.push_back(poly.edge(i));
    }
    return out;
  }

  bool inside_obstacle(const Point2d& p) const {
    for (const auto& poly : obstacles) {
      if (poly.contains(p)) return true;
    }
    return false;
  }

  /// Distance from p to the closest wall or obstacle boundary (0 inside an obstacle).
  double clearance(const Point2d& p) const {
    if (inside_obstacle(p)) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : segments()) best = std::min(best, dist_point_segment(p, s));
    return best;
  }

  /// True when the open segment a-b crosses any mapped edge.
  bool blocks(const Point2d& a, const Point2d& b) const {
    const Segmentd sight{a, b};
    for (const auto& s : segments()) {
      if (segments_intersect(sight, s)) return true;
    }
    return false;
  }
};

/// Axis-aligned rectangle as a CCW convex polygon.
inline ConvexPolygond make_box(double xmin, double ymin, double xmax, double ymax) {
  return ConvexPolygond({{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}});
}

/// The four walls of an axis-aligned room.
inline std::vector<Segmentd> make_room(double xmin, double ymin, double xmax, double ymax) {
  return {{{xmin, ymin}, {xmax, ymin}},
          {{xmax, ymin}, {xmax, ymax}},
          {{xmax, ymax}, {xmin, ymax}},
          {{xmin, ymax}, {xmin, ymin}}};
}

}  // namespace oampc
