#include "oampc/reachability.hpp"

#include <cmath>

namespace oampc {

double step_distance(const AgentModel& model, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_distance: dt must be > 0");
  if (!(model.v_target >= 0.0)) throw std::invalid_argument("step_distance: v_target must be >= 0");
  return model.v_target * dt;
}

CapsuleFamily build_capsules(const OcclusionBoundary& boundary, const AgentModel& model, double dt, int N) {
  if (N < 1) throw std::invalid_argument("build_capsules: N must be >= 1");
  const double d = step_distance(model, dt);
  CapsuleFamily fam;
  fam.boundary = boundary;
  fam.capsules.reserve(static_cast<std::size_t>(N));
  for (int k = 1; k <= N; ++k) {
    fam.capsules.push_back(Capsuled::around(boundary.seg, k * d + model.radius));
  }
  return fam;
}

DiskFamily build_disks(const Diskd& detection, const AgentModel& model, double dt, int N) {
  if (N < 1) throw std::invalid_argument("build_disks: N must be >= 1");
  const double d = step_distance(model, dt);
  DiskFamily fam;
  fam.initial = detection;
  fam.disks.reserve(static_cast<std::size_t>(N));
  for (int k = 1; k <= N; ++k) {
    fam.disks.push_back({detection.center, detection.radius + k * d});
  }
  return fam;
}

Diskd fuse_measurement(const Diskd& prev, const Diskd& sensed) {
  if (prev.contains(sensed)) return sensed;
  if (sensed.contains(prev)) return prev;
  const double dist = (sensed.center - prev.center).norm();
  if (dist > prev.radius + sensed.radius + kGeometryEps<double>) {
    throw ModelViolationError("fuse_measurement: agent observed outside its reachable set");
  }
  // The lens touches prev's boundary at the two chord endpoints. A disk
  // inside prev through both of them is prev itself, so prev is the tightest
  // disk answer here.
  return prev;
}

}  // namespace oampc
