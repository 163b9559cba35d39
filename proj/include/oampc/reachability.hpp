#pragma once

// Forward reachable sets for agents with a known speed bound: nested capsules
// grown around occlusion boundaries and nested disks around visible agents.

#include <stdexcept>
#include <vector>

#include "oampc/geometry.hpp"
#include "oampc/lidar.hpp"

namespace oampc {

struct AgentModel {
  double v_target = 0.5;  // speed upper bound
  double radius = 0.0;    // physical radius
};

/// Capsules for k = 1..N; capsules[k - 1] is the set reachable after k steps.
struct CapsuleFamily {
  OcclusionBoundary boundary;
  std::vector<Capsuled> capsules;

  const Capsuled& at(int k) const { return capsules.at(static_cast<std::size_t>(k - 1)); }
  int horizon() const { return static_cast<int>(capsules.size()); }
};

/// Concentric disks for k = 1..N around a containment disk.
struct DiskFamily {
  Diskd initial;
  std::vector<Diskd> disks;

  const Diskd& at(int k) const { return disks.at(static_cast<std::size_t>(k - 1)); }
  int horizon() const { return static_cast<int>(disks.size()); }
};

/// Agent observed outside the set its speed bound allows.
class ModelViolationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maximum distance an agent covers in one step: v_target * dt.
double step_distance(const AgentModel& model, double dt);

CapsuleFamily build_capsules(const OcclusionBoundary& boundary, const AgentModel& model, double dt, int N);

DiskFamily build_disks(const Diskd& detection, const AgentModel& model, double dt, int N);

/// Disk covering sensed ∩ prev_one_step and contained in prev_one_step.
/// Throws ModelViolationError when the two disks are disjoint.
Diskd fuse_measurement(const Diskd& prev_one_step, const Diskd& sensed);

}  // namespace oampc
