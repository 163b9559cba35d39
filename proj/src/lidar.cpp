#include "oampc/lidar.hpp"

#include <cmath>
#include <numbers>

namespace oampc {

void LidarParams::validate() const {
  if (num_rays < 8) throw std::invalid_argument("lidar.num_rays must be >= 8");
  if (!(max_range > 0.0)) throw std::invalid_argument("lidar.max_range must be > 0");
  if (!(jump_threshold > 0.0)) throw std::invalid_argument("lidar.jump_threshold must be > 0");
  if (!(downsample_spacing >= 0.0)) throw std::invalid_argument("lidar.downsample_spacing must be >= 0");
  // Greedy thinning leaves dropped hits up to one spacing from a kept one.
  if (coverage_radius < downsample_spacing) {
    throw std::invalid_argument("lidar.coverage_radius must be >= lidar.downsample_spacing");
  }
}

Point2d Scan::endpoint(std::size_t i) const {
  if (hits[i]) return *hits[i];
  return pose.position() + ranges[i] * Point2d(std::cos(angles[i]), std::sin(angles[i]));
}

Scan scan(const World& world, const RobotState& pose, const LidarParams& params) {
  const Point2d origin = pose.position();
  if (world.inside_obstacle(origin)) {
    throw PoseInObstacleError("scan: pose lies inside an obstacle");
  }
  const std::vector<Segmentd> segs = world.segments();
  Scan out;
  out.pose = pose;
  const auto n = static_cast<std::size_t>(params.num_rays);
  out.angles.resize(n);
  out.ranges.resize(n);
  out.hits.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    out.angles[i] = a;
    const auto hit = raycast<double>(origin, {std::cos(a), std::sin(a)}, segs, params.max_range);
    if (hit) {
      out.ranges[i] = hit->range;
      out.hits[i] = hit->point;
    } else {
      out.ranges[i] = params.max_range;
    }
  }
  return out;
}

std::vector<OcclusionBoundary> detect_occlusions(const Scan& scan, const LidarParams& params) {
  std::vector<OcclusionBoundary> out;
  const std::size_t n = scan.size();
  // The last and first rays are neighbours only when the sweep closes the circle.
  bool closed = false;
  if (n >= 3) {
    const double step = (scan.angles[n - 1] - scan.angles[0]) / static_cast<double>(n - 1);
    const double gap = scan.angles[0] + 2.0 * std::numbers::pi - scan.angles[n - 1];
    closed = std::abs(gap - step) <= 0.5 * std::abs(step);
  }
  const std::size_t pairs = closed ? n : (n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::size_t j = (i + 1) % n;
    if (std::abs(scan.ranges[j] - scan.ranges[i]) <= params.jump_threshold) continue;
    const bool i_near = scan.ranges[i] < scan.ranges[j];
    const std::size_t near = i_near ? i : j;
    const std::size_t far = i_near ? j : i;
    out.push_back({{scan.endpoint(near), scan.endpoint(far)}, i});
  }
  return out;
}

std::vector<PointCloudCircle> downsample(const Scan& scan, const LidarParams& params) {
  std::vector<PointCloudCircle> out;
  for (const auto& h : scan.hits) {
    if (!h) continue;
    if (out.empty() || (*h - out.back().center).norm() >= params.downsample_spacing) {
      out.push_back({*h, params.coverage_radius});
    }
  }
  return out;
}

}  // namespace oampc
