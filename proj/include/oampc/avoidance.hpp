#pragma once

// Collision-avoidance half of the alternation: shift the last open-loop plan
// one step and project each predicted position onto every per-step set.

#include <vector>

#include "oampc/reachability.hpp"
#include "oampc/types.hpp"

namespace oampc {

struct OpenLoopPlan {
  std::vector<RobotState> states;    // z_0 .. z_N
  std::vector<ControlInput> inputs;  // u_0 .. u_{N-1}
  double stamp = 0.0;

  int horizon() const { return static_cast<int>(inputs.size()); }
};

/// All per-step sets the planner must avoid at one time instant.
struct ReachableSets {
  std::vector<CapsuleFamily> capsules;
  std::vector<DiskFamily> disks;

  std::size_t size() const { return capsules.size() + disks.size(); }
};

struct ProjectionEntry {
  Point2d z_proj = Point2d::Zero();
  double d_proj = 0.0;
  Point2d normal = Point2d::UnitX();  // outward normal of the set at z_proj
  ProjectionBranch branch = ProjectionBranch::kPolytope;
  bool interior = false;

  bool operator==(const ProjectionEntry&) const = default;
};

/// entries[r][k - 1] is the projection at step k onto set r. Capsule
/// families come first, then disk families, in ReachableSets order.
struct ProjectionSet {
  int horizon = 0;
  std::vector<std::vector<ProjectionEntry>> entries;

  std::size_t num_sets() const { return entries.size(); }
  const ProjectionEntry& at(std::size_t r, int k) const { return entries[r][static_cast<std::size_t>(k - 1)]; }
};

/// [z_2, ..., z_N, z_N + (z_N - z_{N-1})] in position, for a plan z_0..z_N.
std::vector<Point2d> shift_extrapolate(const OpenLoopPlan& prev);

/// `threads` > 1 splits the sets across worker threads; the result is
/// identical to the serial evaluation.
ProjectionSet project_plan(const std::vector<Point2d>& shifted, const ReachableSets& sets, unsigned threads = 1);

}  // namespace oampc
