#pragma once

// Exact 2D primitives: disks, convex polygons in V/H form, capsules, and the
// point-to-set projections the avoidance layer feeds into the NMPC.
//
// Everything is templated on the scalar type and header-only; the rest of the
// library uses the double aliases at the bottom of this file.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace oampc {

/// Thrown for degenerate or non-convex input to the polygon routines.
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
constexpr Scalar kGeometryEps = Scalar(1e-9);

template <typename Scalar>
Scalar cross2(const Point2<Scalar>& a, const Point2<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// z-component of (b - a) x (c - a); positive when a, b, c turn left.
template <typename Scalar>
Scalar orient(const Point2<Scalar>& a, const Point2<Scalar>& b, const Point2<Scalar>& c) {
  return cross2<Scalar>(b - a, c - a);
}

template <typename Scalar>
struct Disk {
  Point2<Scalar> center = Point2<Scalar>::Zero();
  Scalar radius = Scalar(0);

  bool contains(const Point2<Scalar>& p, Scalar tol = kGeometryEps<Scalar>) const {
    return (p - center).norm() <= radius + tol;
  }
  /// True when `inner` lies entirely inside this disk.
  bool contains(const Disk& inner, Scalar tol = kGeometryEps<Scalar>) const {
    return (inner.center - center).norm() + inner.radius <= radius + tol;
  }
  bool operator==(const Disk&) const = default;
};

template <typename Scalar>
struct Segment {
  Point2<Scalar> a = Point2<Scalar>::Zero();
  Point2<Scalar> b = Point2<Scalar>::Zero();

  Scalar length() const { return (b - a).norm(); }
  bool degenerate(Scalar tol = kGeometryEps<Scalar>) const { return length() <= tol; }
  bool operator==(const Segment&) const = default;
};

/// Closest point on a segment, with the clamped line parameter.
template <typename Scalar>
Point2<Scalar> closest_point_on_segment(const Point2<Scalar>& p, const Segment<Scalar>& s,
                                        Scalar* param = nullptr) {
  const Point2<Scalar> d = s.b - s.a;
  const Scalar len2 = d.squaredNorm();
  Scalar t = Scalar(0);
  if (len2 > Scalar(0)) {
    t = std::clamp((p - s.a).dot(d) / len2, Scalar(0), Scalar(1));
  }
  if (param != nullptr) {
    *param = t;
  }
  return s.a + t * d;
}

template <typename Scalar>
Scalar dist_point_segment(const Point2<Scalar>& p, const Segment<Scalar>& s) {
  return (p - closest_point_on_segment(p, s)).norm();
}

/// Halfspace {y : normal . y <= offset}; normal has unit length.
template <typename Scalar>
struct Halfspace {
  Point2<Scalar> normal = Point2<Scalar>::UnitX();
  Scalar offset = Scalar(0);

  Scalar residual(const Point2<Scalar>& y) const { return normal.dot(y) - offset; }
};

/// Outward unit-normal H-representation of a CCW strictly convex polygon.
template <typename Scalar>
std::vector<Halfspace<Scalar>> halfspaces_from_vertices(std::span<const Point2<Scalar>> vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) {
    throw GeometryError("halfspaces_from_vertices: need at least 3 vertices");
  }
  std::vector<Halfspace<Scalar>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2<Scalar>& a = vertices[i];
    const Point2<Scalar>& b = vertices[(i + 1) % n];
    const Point2<Scalar>& c = vertices[(i + 2) % n];
    if (orient(a, b, c) <= kGeometryEps<Scalar>) {
      throw GeometryError("halfspaces_from_vertices: polygon is not strictly convex and CCW");
    }
    const Point2<Scalar> e = b - a;
    const Scalar len = e.norm();
    if (len <= kGeometryEps<Scalar>) {
      throw GeometryError("halfspaces_from_vertices: repeated vertex");
    }
    Halfspace<Scalar> h;
    h.normal = Point2<Scalar>(e.y(), -e.x()) / len;
    h.offset = h.normal.dot(a);
    out.push_back(h);
  }
  for (const auto& h : out) {
    for (const auto& v : vertices) {
      if (h.residual(v) > kGeometryEps<Scalar>) {
        throw GeometryError("halfspaces_from_vertices: polygon is not convex");
      }
    }
  }
  return out;
}

/// Convex polygon carrying both its CCW vertex list and its H-representation.
template <typename Scalar>
class ConvexPolygon {
 public:
  ConvexPolygon() = default;

  /// Validates `ccw_vertices` (strictly convex, CCW) and derives Ay <= b.
  explicit ConvexPolygon(std::vector<Point2<Scalar>> ccw_vertices)
      : vertices_(std::move(ccw_vertices)),
        halfspaces_(halfspaces_from_vertices<Scalar>(vertices_)) {}

  const std::vector<Point2<Scalar>>& vertices() const { return vertices_; }
  const std::vector<Halfspace<Scalar>>& halfspaces() const { return halfspaces_; }

  bool contains(const Point2<Scalar>& p, Scalar tol = kGeometryEps<Scalar>) const {
    return std::all_of(halfspaces_.begin(), halfspaces_.end(),
                       [&](const Halfspace<Scalar>& h) { return h.residual(p) <= tol; });
  }

  Segment<Scalar> edge(std::size_t i) const {
    return {vertices_[i], vertices_[(i + 1) % vertices_.size()]};
  }

 private:
  std::vector<Point2<Scalar>> vertices_;
  std::vector<Halfspace<Scalar>> halfspaces_;
};

/// Andrew's monotone chain. Collinear boundary points are dropped.
template <typename Scalar>
ConvexPolygon<Scalar> convex_hull(std::span<const Point2<Scalar>> points) {
  std::vector<Point2<Scalar>> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const Point2<Scalar>& l, const Point2<Scalar>& r) {
    return l.x() < r.x() || (l.x() == r.x() && l.y() < r.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point2<Scalar>& l, const Point2<Scalar>& r) {
                          return (l - r).norm() <= kGeometryEps<Scalar>;
                        }),
            pts.end());
  if (pts.size() < 3) {
    throw GeometryError("convex_hull: fewer than 3 distinct points");
  }
  std::vector<Point2<Scalar>> hull(2 * pts.size());
  std::size_t k = 0;
  const auto turn = [](const Point2<Scalar>& o, const Point2<Scalar>& a, const Point2<Scalar>& b) {
    return orient(o, a, b);
  };
  for (const auto& p : pts) {
    while (k >= 2 && turn(hull[k - 2], hull[k - 1], p) <= kGeometryEps<Scalar>) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && turn(hull[k - 2], hull[k - 1], pts[i]) <= kGeometryEps<Scalar>) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) {
    throw GeometryError("convex_hull: points are collinear");
  }
  return ConvexPolygon<Scalar>(std::move(hull));
}

/// Which piece of a set produced a projection.
enum class ProjectionBranch { kPolytope, kCircle1, kCircle2 };

/// Distance from a point to a set and the associated projected point.
///
/// `normal` is the outward unit normal of the supporting line through `point`;
/// every point y of the set satisfies normal . (y - point) <= 0.
template <typename Scalar>
struct Projection {
  Scalar distance = Scalar(0);
  Point2<Scalar> point = Point2<Scalar>::Zero();
  Point2<Scalar> normal = Point2<Scalar>::UnitX();
  ProjectionBranch branch = ProjectionBranch::kPolytope;
  bool interior = false;
};

/// Closed-form solution of min ||p - y|| s.t. Ay <= b for a 2D convex polygon.
template <typename Scalar>
Projection<Scalar> dist_point_polygon(const Point2<Scalar>& p, const ConvexPolygon<Scalar>& poly) {
  Projection<Scalar> out;
  if (poly.contains(p)) {
    out.point = p;
    out.interior = true;
    // Outward normal of the nearest face, for callers that need a direction.
    Scalar best = -std::numeric_limits<Scalar>::infinity();
    for (const auto& h : poly.halfspaces()) {
      if (h.residual(p) > best) {
        best = h.residual(p);
        out.normal = h.normal;
      }
    }
    return out;
  }
  out.distance = std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 0; i < poly.vertices().size(); ++i) {
    const Point2<Scalar> c = closest_point_on_segment(p, poly.edge(i));
    const Scalar d = (p - c).norm();
    if (d < out.distance) {
      out.distance = d;
      out.point = c;
    }
  }
  out.normal = (p - out.point) / out.distance;
  return out;
}

/// Union of two equal disks and the rectangle joining them.
///
/// `body` is absent when the capsule degenerates: zero-length axis (a single
/// disk) or zero radius (the bare segment).
template <typename Scalar>
struct Capsule {
  Disk<Scalar> c1;
  Disk<Scalar> c2;
  std::optional<ConvexPolygon<Scalar>> body;

  Scalar radius() const { return c1.radius; }
  Segment<Scalar> axis() const { return {c1.center, c2.center}; }

  bool contains(const Point2<Scalar>& p, Scalar tol = kGeometryEps<Scalar>) const {
    return dist_point_segment(p, axis()) <= radius() + tol;
  }

  /// Builds the capsule of `radius` around `axis`: disks at both endpoints and
  /// the hull of the four tangent points perpendicular to the axis.
  static Capsule around(const Segment<Scalar>& axis, Scalar radius) {
    if (!(radius >= Scalar(0))) {
      throw GeometryError("Capsule::around: negative radius");
    }
    Capsule cap;
    cap.c1 = {axis.a, radius};
    cap.c2 = {axis.b, radius};
    const Point2<Scalar> d = axis.b - axis.a;
    const Scalar len = d.norm();
    if (len > kGeometryEps<Scalar> && radius > kGeometryEps<Scalar>) {
      const Point2<Scalar> n = Point2<Scalar>(-d.y(), d.x()) * (radius / len);
      const std::vector<Point2<Scalar>> tangents{axis.a + n, axis.a - n, axis.b + n, axis.b - n};
      cap.body = convex_hull<Scalar>(tangents);
    }
    return cap;
  }
};

// Projection onto the boundary of a disk, used for the circle branches.
template <typename Scalar>
Projection<Scalar> project_onto_disk(const Point2<Scalar>& p, const Disk<Scalar>& disk,
                                     const Point2<Scalar>& fallback_dir) {
  Projection<Scalar> out;
  const Point2<Scalar> rel = p - disk.center;
  const Scalar dc = rel.norm();
  out.normal = dc > kGeometryEps<Scalar> ? Point2<Scalar>(rel / dc) : fallback_dir;
  out.distance = std::max(dc - disk.radius, Scalar(0));
  out.interior = dc < disk.radius;
  if (dc > kGeometryEps<Scalar>) {
    // z_proj = (1 - ratio) p + ratio c, ratio = (|p - c| - r) / |p - c|
    const Scalar ratio = (dc - disk.radius) / dc;
    out.point = (Scalar(1) - ratio) * p + ratio * disk.center;
  } else {
    out.point = disk.center + disk.radius * fallback_dir;
  }
  return out;
}

/// Projection of a point onto a capsule.
///
/// Exterior points take the minimum of the two circle distances and the
/// polytope distance, ties resolved polytope, circle 1, circle 2. Interior
/// points report distance 0 and the nearest boundary point.
template <typename Scalar>
Projection<Scalar> dist_point_capsule(const Point2<Scalar>& p, const Capsule<Scalar>& cap) {
  const Segment<Scalar> ax = cap.axis();
  const Scalar r = cap.radius();
  const Point2<Scalar> dir = ax.b - ax.a;
  const Scalar len = dir.norm();
  const Point2<Scalar> perp =
      len > kGeometryEps<Scalar> ? Point2<Scalar>(-dir.y() / len, dir.x() / len) : Point2<Scalar>::UnitY();

  Scalar t = Scalar(0);
  const Point2<Scalar> foot = closest_point_on_segment(p, ax, &t);
  const Scalar axis_dist = (p - foot).norm();
  const ProjectionBranch foot_branch = len <= kGeometryEps<Scalar> ? ProjectionBranch::kCircle1
                                       : t <= Scalar(0)            ? ProjectionBranch::kCircle1
                                       : t >= Scalar(1)            ? ProjectionBranch::kCircle2
                                                                   : ProjectionBranch::kPolytope;

  if (axis_dist < r || (axis_dist <= kGeometryEps<Scalar>)) {
    // Interior (or on a zero-radius axis): nearest boundary point along the
    // direction away from the axis.
    Projection<Scalar> out;
    out.interior = axis_dist < r;
    out.normal = axis_dist > kGeometryEps<Scalar> ? Point2<Scalar>((p - foot) / axis_dist) : perp;
    out.point = foot + r * out.normal;
    out.distance = Scalar(0);
    out.branch = foot_branch;
    return out;
  }

  const Projection<Scalar> on_c1 = project_onto_disk(p, cap.c1, perp);
  const Projection<Scalar> on_c2 = project_onto_disk(p, cap.c2, perp);
  Projection<Scalar> best;
  if (cap.body) {
    best = dist_point_polygon(p, *cap.body);
    best.branch = ProjectionBranch::kPolytope;
  } else if (len > kGeometryEps<Scalar>) {
    // Zero-radius capsule: the polytope collapses onto the axis segment.
    best.point = foot;
    best.distance = axis_dist;
    best.normal = (p - foot) / axis_dist;
    best.branch = ProjectionBranch::kPolytope;
  } else {
    best.distance = std::numeric_limits<Scalar>::infinity();
  }
  Projection<Scalar> c1 = on_c1;
  c1.branch = ProjectionBranch::kCircle1;
  Projection<Scalar> c2 = on_c2;
  c2.branch = ProjectionBranch::kCircle2;
  if (c1.distance < best.distance) best = c1;
  if (c2.distance < best.distance) best = c2;
  best.interior = false;
  return best;
}

/// Projection onto a disk, reported with the same conventions as capsules.
template <typename Scalar>
Projection<Scalar> dist_point_disk(const Point2<Scalar>& p, const Disk<Scalar>& disk) {
  Projection<Scalar> out = project_onto_disk<Scalar>(p, disk, Point2<Scalar>::UnitX());
  out.branch = ProjectionBranch::kCircle1;
  return out;
}

template <typename Scalar>
struct RayHit {
  Scalar range = Scalar(0);
  Point2<Scalar> point = Point2<Scalar>::Zero();
  std::size_t segment = 0;
};

/// Nearest intersection of the ray origin + t dir, 0 < t <= max_range.
template <typename Scalar>
std::optional<RayHit<Scalar>> raycast(const Point2<Scalar>& origin, const Point2<Scalar>& dir,
                                      std::span<const Segment<Scalar>> segments, Scalar max_range) {
  std::optional<RayHit<Scalar>> best;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Point2<Scalar> e = segments[i].b - segments[i].a;
    const Scalar denom = cross2<Scalar>(dir, e);
    if (std::abs(denom) <= std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + e.norm())) {
      continue;
    }
    const Point2<Scalar> w = segments[i].a - origin;
    const Scalar t = cross2<Scalar>(w, e) / denom;
    const Scalar s = cross2<Scalar>(w, dir) / denom;
    if (t <= Scalar(0) || t > max_range || s < -kGeometryEps<Scalar> || s > Scalar(1) + kGeometryEps<Scalar>) {
      continue;
    }
    if (!best || t < best->range) {
      best = RayHit<Scalar>{t, origin + t * dir, i};
    }
  }
  return best;
}

/// Proper or touching intersection test between two closed segments.
template <typename Scalar>
bool segments_intersect(const Segment<Scalar>& s, const Segment<Scalar>& q) {
  const Scalar d1 = orient(q.a, q.b, s.a);
  const Scalar d2 = orient(q.a, q.b, s.b);
  const Scalar d3 = orient(s.a, s.b, q.a);
  const Scalar d4 = orient(s.a, s.b, q.b);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  const auto on = [](const Segment<Scalar>& seg, const Point2<Scalar>& p) {
    return dist_point_segment(p, seg) <= kGeometryEps<Scalar>;
  };
  return on(q, s.a) || on(q, s.b) || on(s, q.a) || on(s, q.b);
}

/// Crossing-number test for an arbitrary simple polygon.
template <typename Scalar>
bool point_in_polygon(const Point2<Scalar>& p, std::span<const Point2<Scalar>> poly) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point2<Scalar>& a = poly[i];
    const Point2<Scalar>& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const Scalar x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

/// Heading-wrapped angle in (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  const Scalar two_pi = Scalar(2 * M_PI);
  a = std::fmod(a + Scalar(M_PI), two_pi);
  if (a <= Scalar(0)) a += two_pi;
  return a - Scalar(M_PI);
}

using Point2d = Point2<double>;
using Diskd = Disk<double>;
using Segmentd = Segment<double>;
using Halfspaced = Halfspace<double>;
using ConvexPolygond = ConvexPolygon<double>;
using Capsuled = Capsule<double>;
using Projectiond = Projection<double>;

}  // namespace oampc
