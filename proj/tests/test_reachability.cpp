#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oampc/reachability.hpp"

namespace oampc {
namespace {

constexpr double kPi = std::numbers::pi;

// Uniform point in the disk of radius `r` around `c`.
Point2d sample_disk(std::mt19937_64& rng, const Point2d& c, double r) {
  std::uniform_real_distribution<double> u(0, 1);
  const double a = 2 * kPi * u(rng), s = r * std::sqrt(u(rng));
  return c + s * Point2d(std::cos(a), std::sin(a));
}

TEST(StepDistance, Examples) {
  EXPECT_NEAR(step_distance({0.5, 0}, 0.1), 0.05, 1e-15);
  EXPECT_EQ(step_distance({0.0, 0}, 0.1), 0.0);
  EXPECT_NEAR(step_distance({0.6, 0}, 0.1), 0.06, 1e-15);
  EXPECT_THROW(step_distance({-1.0, 0}, 0.1), std::invalid_argument);
  EXPECT_THROW(step_distance({0.5, 0}, 0.0), std::invalid_argument);
}

TEST(BuildCapsules, MinkowskiSumAtHorizon) {
  const OcclusionBoundary ob{{{1, 0}, {3, 0}}, 0};
  const CapsuleFamily fam = build_capsules(ob, {0.5, 0.0}, 0.1, 10);
  ASSERT_EQ(fam.horizon(), 10);
  const Capsuled& c = fam.at(10);
  EXPECT_NEAR(c.radius(), 0.5, 1e-12);
  EXPECT_EQ(c.axis(), ob.seg);
  // Sampling oracle: inside exactly when within 0.5 of the segment.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(0, 4), uy(-1, 1);
  for (int i = 0; i < 10000; ++i) {
    const Point2d p(ux(rng), uy(rng));
    const double dx = std::max({1.0 - p.x(), 0.0, p.x() - 3.0});
    const double d = std::hypot(dx, p.y());
    if (std::abs(d - 0.5) < 1e-9) continue;
    EXPECT_EQ(c.contains(p), d < 0.5) << p.transpose();
    EXPECT_EQ(dist_point_capsule(p, c).distance > 0, d > 0.5);
  }
}

TEST(BuildCapsules, StaticAgentIsBareSegment) {
  const OcclusionBoundary ob{{{0, 0}, {1, 1}}, 3};
  const CapsuleFamily fam = build_capsules(ob, {0.0, 0.0}, 0.1, 1);
  ASSERT_EQ(fam.horizon(), 1);
  EXPECT_EQ(fam.at(1).radius(), 0.0);
  const CapsuleFamily fat = build_capsules(ob, {0.0, 0.2}, 0.1, 1);
  EXPECT_NEAR(fat.at(1).radius(), 0.2, 1e-15);
}

TEST(BuildCapsules, Nested) {
  const OcclusionBoundary ob{{{0, 0}, {0.7, -0.4}}, 0};
  const CapsuleFamily fam = build_capsules(ob, {0.5, 0.0}, 0.1, 10);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> t(0, 1);
  for (int k = 1; k < fam.horizon(); ++k) {
    const Capsuled& ck = fam.at(k);
    for (int i = 0; i < 1000; ++i) {
      const Point2d foot = ck.axis().a + t(rng) * (ck.axis().b - ck.axis().a);
      const Point2d p = sample_disk(rng, foot, ck.radius());
      ASSERT_TRUE(ck.contains(p));
      ASSERT_TRUE(fam.at(k + 1).contains(p));
    }
  }
}

TEST(BuildDisks, Radii) {
  const DiskFamily fam = build_disks({{0, 0}, 0.1}, {0.5, 0.0}, 0.1, 3);
  ASSERT_EQ(fam.horizon(), 3);
  EXPECT_NEAR(fam.at(1).radius, 0.15, 1e-12);
  EXPECT_NEAR(fam.at(2).radius, 0.20, 1e-12);
  EXPECT_NEAR(fam.at(3).radius, 0.25, 1e-12);
  const DiskFamily still = build_disks({{1, 2}, 0.3}, {0.0, 0.0}, 0.1, 4);
  for (const auto& d : still.disks) EXPECT_EQ(d, still.initial);
}

TEST(FuseMeasurement, SubsetAndIdentity) {
  const Diskd prev{{0, 0}, 1.0};
  const Diskd sensed{{0.5, 0}, 0.3};
  EXPECT_EQ(fuse_measurement(prev, sensed), sensed);
  EXPECT_EQ(fuse_measurement(prev, prev), prev);
}

TEST(FuseMeasurement, LensCoveredAndInsidePrev) {
  const Diskd prev{{0, 0}, 1.0};
  const Diskd sensed{{1.5, 0}, 1.0};
  const Diskd fused = fuse_measurement(prev, sensed);
  EXPECT_TRUE(prev.contains(fused));
  std::mt19937_64 rng(2);
  int lens = 0;
  for (int i = 0; i < 10000; ++i) {
    const Point2d p = sample_disk(rng, prev.center, prev.radius);
    if (!sensed.contains(p, 0.0)) continue;
    ++lens;
    ASSERT_TRUE(fused.contains(p));
  }
  EXPECT_GT(lens, 100);
  for (int i = 0; i < 10000; ++i) ASSERT_TRUE(prev.contains(sample_disk(rng, fused.center, fused.radius)));
}

TEST(FuseMeasurement, DisjointViolatesModel) {
  EXPECT_THROW(fuse_measurement({{0, 0}, 1.0}, {{3, 0}, 0.5}), ModelViolationError);
}

}  // namespace
}  // namespace oampc
