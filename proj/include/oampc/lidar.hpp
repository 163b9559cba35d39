#pragma once

// 360 degree range sensor over a static World, range-jump occlusion detection
// and point-cloud thinning for static avoidance.

#include <optional>
#include <stdexcept>
#include <vector>

#include "oampc/types.hpp"
#include "oampc/world.hpp"

namespace oampc {

struct LidarParams {
  int num_rays = 360;
  double max_range = 8.0;
  double jump_threshold = 0.4;
  double downsample_spacing = 0.1;
  double coverage_radius = 0.1;

  /// Throws std::invalid_argument on an inconsistent parameter set.
  void validate() const;
};

struct Scan {
  RobotState pose;
  std::vector<double> angles;
  std::vector<double> ranges;
  std::vector<std::optional<Point2d>> hits;

  std::size_t size() const { return ranges.size(); }
  /// Hit point, or the point at max range along the ray for a miss.
  Point2d endpoint(std::size_t i) const;
};

struct OcclusionBoundary {
  Segmentd seg;  // near point -> far point
  std::size_t ray_index = 0;
};

struct PointCloudCircle {
  Point2d center = Point2d::Zero();
  double radius = 0.0;
};

class PoseInObstacleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Scan scan(const World& world, const RobotState& pose, const LidarParams& params);

std::vector<OcclusionBoundary> detect_occlusions(const Scan& scan, const LidarParams& params);

/// Greedy thinning in ray order: a hit is kept when it is at least
/// downsample_spacing from the last kept hit.
std::vector<PointCloudCircle> downsample(const Scan& scan, const LidarParams& params);

}  // namespace oampc
