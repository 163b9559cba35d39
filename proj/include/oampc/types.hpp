#pragma once

#include "oampc/geometry.hpp"

namespace oampc {

/// Unicycle pose. psi is kept unwrapped inside the planner.
struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;

  Point2d position() const { return {x, y}; }
  Eigen::Vector3d vec() const { return {x, y, psi}; }
  static RobotState from(const Eigen::Vector3d& z) { return {z.x(), z.y(), z.z()}; }
  RobotState wrapped() const { return {x, y, wrap_angle(psi)}; }
  bool operator==(const RobotState&) const = default;
};

/// Forward speed and heading rate.
struct ControlInput {
  double v = 0.0;
  double delta = 0.0;

  Eigen::Vector2d vec() const { return {v, delta}; }
  bool operator==(const ControlInput&) const = default;
};

}  // namespace oampc
