#include "oampc/avoidance.hpp"

#include <stdexcept>
#include <thread>

namespace oampc {

std::vector<Point2d> shift_extrapolate(const OpenLoopPlan& prev) {
  const std::size_t n = prev.states.size();
  if (n < 2) throw std::invalid_argument("shift_extrapolate: plan needs at least two states");
  std::vector<Point2d> out;
  out.reserve(n - 1);
  for (std::size_t k = 2; k < n; ++k) out.push_back(prev.states[k].position());
  const Point2d last = prev.states[n - 1].position();
  out.push_back(last + (last - prev.states[n - 2].position()));
  return out;
}

namespace {

ProjectionEntry to_entry(const Projectiond& p) {
  return {p.point, p.distance, p.normal, p.branch, p.interior};
}

std::vector<ProjectionEntry> project_one(const std::vector<Point2d>& shifted, const ReachableSets& sets,
                                         std::size_t r) {
  std::vector<ProjectionEntry> row;
  row.reserve(shifted.size());
  for (std::size_t k = 1; k <= shifted.size(); ++k) {
    const Point2d& p = shifted[k - 1];
    if (r < sets.capsules.size()) {
      row.push_back(to_entry(dist_point_capsule(p, sets.capsules[r].at(static_cast<int>(k)))));
    } else {
      row.push_back(to_entry(dist_point_disk(p, sets.disks[r - sets.capsules.size()].at(static_cast<int>(k)))));
    }
  }
  return row;
}

}  // namespace

ProjectionSet project_plan(const std::vector<Point2d>& shifted, const ReachableSets& sets, unsigned threads) {
  const int N = static_cast<int>(shifted.size());
  for (const auto& f : sets.capsules) {
    if (f.horizon() < N) throw std::invalid_argument("project_plan: capsule family shorter than horizon");
  }
  for (const auto& f : sets.disks) {
    if (f.horizon() < N) throw std::invalid_argument("project_plan: disk family shorter than horizon");
  }
  ProjectionSet out;
  out.horizon = N;
  out.entries.resize(sets.size());
  if (threads <= 1 || sets.size() < 2) {
    for (std::size_t r = 0; r < sets.size(); ++r) out.entries[r] = project_one(shifted, sets, r);
    return out;
  }
  std::vector<std::jthread> pool;
  const std::size_t workers = std::min<std::size_t>(threads, sets.size());
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t r = w; r < sets.size(); r += workers) out.entries[r] = project_one(shifted, sets, r);
    });
  }
  pool.clear();  // joins
  return out;
}

}  // namespace oampc
