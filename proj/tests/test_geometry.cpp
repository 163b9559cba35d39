#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oampc/geometry.hpp"

namespace oampc {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(ConvexHull, DropsInteriorPoint) {
  const std::vector<Point2d> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  const ConvexPolygond hull = convex_hull<double>(pts);
  EXPECT_EQ(hull.vertices().size(), 4u);
  for (const auto& v : hull.vertices()) EXPECT_FALSE(v.isApprox(Point2d(0.5, 0.5)));
}

TEST(ConvexHull, TriangleIsIdentity) {
  const std::vector<Point2d> pts{{0, 0}, {2, 0}, {1, 1}};
  const ConvexPolygond hull = convex_hull<double>(pts);
  ASSERT_EQ(hull.vertices().size(), 3u);
  for (const auto& p : pts) {
    bool found = false;
    for (const auto& v : hull.vertices()) found = found || (v - p).norm() < 1e-12;
    EXPECT_TRUE(found);
  }
}

TEST(ConvexHull, ContainsRandomDiskPoints) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(0, 2 * kPi), rad(0, 1);
  std::vector<Point2d> pts;
  for (int i = 0; i < 100; ++i) {
    const double a = ang(rng), r = std::sqrt(rad(rng));
    pts.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  const ConvexPolygond hull = convex_hull<double>(pts);
  // Brute force: every point lies left of (or on) every CCW hull edge.
  for (const auto& p : pts) {
    for (std::size_t i = 0; i < hull.vertices().size(); ++i) {
      const Segmentd e = hull.edge(i);
      EXPECT_GE(orient(e.a, e.b, p), -1e-12);
    }
  }
}

TEST(ConvexHull, TooFewPointsThrows) {
  const std::vector<Point2d> line{{0, 0}, {1, 1}, {2, 2}};
  EXPECT_THROW(convex_hull<double>(line), GeometryError);
}

TEST(Halfspaces, UnitSquare) {
  const std::vector<Point2d> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto hs = halfspaces_from_vertices<double>(sq);
  ASSERT_EQ(hs.size(), 4u);
  const std::vector<std::pair<Point2d, double>> expected{{{0, -1}, 0}, {{1, 0}, 1}, {{0, 1}, 1}, {{-1, 0}, 0}};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR((hs[i].normal - expected[i].first).norm(), 0.0, 1e-12);
    EXPECT_NEAR(hs[i].offset, expected[i].second, 1e-12);
  }
}

TEST(Halfspaces, TriangleSelfConsistent) {
  const std::vector<Point2d> tri{{0, 0}, {2, 0}, {1, 1}};
  const auto hs = halfspaces_from_vertices<double>(tri);
  ASSERT_EQ(hs.size(), 3u);
  for (const auto& h : hs) {
    EXPECT_NEAR(h.normal.norm(), 1.0, 1e-12);
    for (const auto& v : tri) EXPECT_LE(h.residual(v), 1e-9);
  }
}

TEST(Halfspaces, RejectsClockwiseAndNonConvex) {
  const std::vector<Point2d> cw{{0, 0}, {0, 1}, {1, 1}, {1, 0}};
  EXPECT_THROW(halfspaces_from_vertices<double>(cw), GeometryError);
  const std::vector<Point2d> dart{{0, 0}, {2, 0}, {1, 0.5}, {2, 2}, {0, 2}};
  EXPECT_THROW(halfspaces_from_vertices<double>(dart), GeometryError);
}

TEST(Halfspaces, RandomHullAgreesWithPointInPolygon) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Point2d> pts;
  for (int i = 0; i < 30; ++i) pts.emplace_back(u(rng), u(rng));
  const ConvexPolygond hull = convex_hull<double>(pts);
  int inside = 0;
  for (int i = 0; i < 10000; ++i) {
    const Point2d y(u(rng), u(rng));
    if (!point_in_polygon<double>(y, hull.vertices())) continue;
    ++inside;
    for (const auto& h : hull.halfspaces()) ASSERT_LE(h.residual(y), 1e-12);
  }
  EXPECT_GT(inside, 1000);
}

TEST(DistPointPolygon, Examples) {
  const ConvexPolygond sq({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  auto p = dist_point_polygon<double>({2, 0.5}, sq);
  EXPECT_NEAR(p.distance, 1.0, 1e-12);
  EXPECT_NEAR((p.point - Point2d(1, 0.5)).norm(), 0.0, 1e-12);

  p = dist_point_polygon<double>({0.5, 0.5}, sq);
  EXPECT_EQ(p.distance, 0.0);
  EXPECT_TRUE(p.interior);
  EXPECT_NEAR((p.point - Point2d(0.5, 0.5)).norm(), 0.0, 1e-12);

  p = dist_point_polygon<double>({2, 2}, sq);
  EXPECT_NEAR(p.distance, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR((p.point - Point2d(1, 1)).norm(), 0.0, 1e-12);
}

TEST(DistPointPolygon, SupportingNormalProperty) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3);
  const ConvexPolygond tri({{0, 0}, {2, 0}, {1, 1.5}});
  for (int i = 0; i < 2000; ++i) {
    const Point2d p(u(rng), u(rng));
    const auto pr = dist_point_polygon(p, tri);
    if (pr.interior) continue;
    for (const auto& v : tri.vertices()) EXPECT_LE(pr.normal.dot(v - pr.point), 1e-9);
    EXPECT_NEAR((p - pr.point).norm(), pr.distance, 1e-12);
  }
}

TEST(DistPointCapsule, Examples) {
  const Capsuled cap = Capsuled::around({{0, 0}, {2, 0}}, 0.5);
  auto p = dist_point_capsule<double>({3, 0}, cap);
  EXPECT_NEAR(p.distance, 0.5, 1e-12);
  EXPECT_NEAR((p.point - Point2d(2.5, 0)).norm(), 0.0, 1e-12);
  EXPECT_EQ(p.branch, ProjectionBranch::kCircle2);

  p = dist_point_capsule<double>({1, 2}, cap);
  EXPECT_NEAR(p.distance, 1.5, 1e-12);
  EXPECT_NEAR((p.point - Point2d(1, 0.5)).norm(), 0.0, 1e-12);
  EXPECT_EQ(p.branch, ProjectionBranch::kPolytope);

  p = dist_point_capsule<double>({1, 0.2}, cap);
  EXPECT_EQ(p.distance, 0.0);
  EXPECT_TRUE(p.interior);
  EXPECT_NEAR(dist_point_segment(p.point, cap.axis()), 0.5, 1e-12);
  EXPECT_NEAR((p.point - Point2d(1, 0.5)).norm(), 0.0, 1e-12);
}

TEST(DistPointCapsule, DegenerateShapes) {
  const Capsuled bare = Capsuled::around({{0, 0}, {1, 0}}, 0.0);
  EXPECT_FALSE(bare.body.has_value());
  EXPECT_NEAR(dist_point_capsule<double>({0.5, 1}, bare).distance, 1.0, 1e-12);
  const Capsuled dot = Capsuled::around({{1, 1}, {1, 1}}, 0.3);
  EXPECT_NEAR(dist_point_capsule<double>({2, 1}, dot).distance, 0.7, 1e-12);
  EXPECT_THROW(Capsuled::around({{0, 0}, {1, 0}}, -0.1), GeometryError);
}

TEST(Raycast, Examples) {
  const std::vector<Segmentd> wall{{{2, -1}, {2, 1}}};
  const auto hit = raycast<double>({0, 0}, {1, 0}, wall, 10.0);
  ASSERT_TRUE(hit.has_value());
  EXPECT_NEAR(hit->range, 2.0, 1e-12);
  EXPECT_NEAR((hit->point - Point2d(2, 0)).norm(), 0.0, 1e-12);
  EXPECT_FALSE(raycast<double>({0, 0}, {0, 1}, wall, 10.0).has_value());
}

TEST(Raycast, SquareRoomAnalytic) {
  const std::vector<Segmentd> room{{{-2, -2}, {2, -2}}, {{2, -2}, {2, 2}}, {{2, 2}, {-2, 2}}, {{-2, 2}, {-2, -2}}};
  for (int i = 0; i < 360; ++i) {
    const double th = 2 * kPi * i / 360;
    const auto hit = raycast<double>({0, 0}, {std::cos(th), std::sin(th)}, room, 10.0);
    ASSERT_TRUE(hit.has_value());
    EXPECT_NEAR(hit->range, 2.0 / std::max(std::abs(std::cos(th)), std::abs(std::sin(th))), 1e-9);
  }
}

TEST(Geometry, WrapAngle) {
  EXPECT_NEAR(wrap_angle(3 * kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(-kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(0.5), 0.5, 1e-15);
  EXPECT_NEAR(wrap_angle(-2 * kPi - 0.25), -0.25, 1e-12);
}

TEST(Geometry, SegmentsIntersect) {
  EXPECT_TRUE(segments_intersect<double>({{0, 0}, {1, 1}}, {{0, 1}, {1, 0}}));
  EXPECT_TRUE(segments_intersect<double>({{0, 0}, {1, 0}}, {{1, 0}, {2, 3}}));
  EXPECT_FALSE(segments_intersect<double>({{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}));
}

TEST(Geometry, FloatInstantiation) {
  const Capsule<float> cap = Capsule<float>::around({{0.f, 0.f}, {2.f, 0.f}}, 0.5f);
  EXPECT_NEAR(dist_point_capsule<float>({1.f, 2.f}, cap).distance, 1.5f, 1e-6f);
}

}  // namespace
}  // namespace oampc
