#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary. None of them calls into the code under test beyond
// plain data types.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "oampc/nmpc.hpp"

namespace oampc::oracle {

/// Point on the boundary of the capsule around a-b with radius r, by arc
/// length s in [0, perimeter): right side, far cap, left side, near cap.
inline Point2d capsule_boundary(const Point2d& a, const Point2d& b, double r, double s) {
  const double L = (b - a).norm();
  const Point2d t = L > 0 ? Point2d((b - a) / L) : Point2d::UnitX();
  const Point2d n(-t.y(), t.x());
  const double arc = std::numbers::pi * r;
  const double base = std::atan2(-n.y(), -n.x());  // direction of the right side
  if (s < L) return a - r * n + s * t;
  s -= L;
  if (s < arc) {
    const double th = base + (r > 0 ? s / r : 0.0);
    return b + r * Point2d(std::cos(th), std::sin(th));
  }
  s -= arc;
  if (s < L) return b + r * n - s * t;
  s -= L;
  const double th = base + std::numbers::pi + (r > 0 ? s / r : 0.0);
  return a + r * Point2d(std::cos(th), std::sin(th));
}

/// Distance from p to the capsule by dense boundary sampling, refined around
/// the best sample by golden-section search. 0 when p is inside.
inline double capsule_distance(const Point2d& p, const Point2d& a, const Point2d& b, double r, int samples = 2000) {
  // Inside test by sampling the axis densely.
  double axis_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    const Point2d q = a + (b - a) * (static_cast<double>(i) / samples);
    axis_min = std::min(axis_min, (p - q).norm());
  }
  if (axis_min <= r) return 0.0;
  const double L = (b - a).norm();
  const double per = 2 * L + 2 * std::numbers::pi * r;
  if (per <= 0) return (p - a).norm();
  const auto f = [&](double s) {
    s = std::fmod(s + per, per);
    return (p - capsule_boundary(a, b, r, s)).norm();
  };
  double best_s = 0, best = std::numeric_limits<double>::infinity();
  const double h = per / samples;
  for (int i = 0; i < samples; ++i) {
    const double v = f(i * h);
    if (v < best) best = v, best_s = i * h;
  }
  double lo = best_s - h, hi = best_s + h;
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
    if (f(m1) < f(m2)) hi = m2; else lo = m1;
  }
  best = std::min(best, f(0.5 * (lo + hi)));
  return best;
}

/// total_cost written out term by term in scalars.
inline double naive_cost(const OpenLoopPlan& plan, const RobotState& goal, const MpcParams& p,
                         const ControlInput& u_prev) {
  double J = 0.0;
  for (const auto& z : plan.states) {
    const double e[3] = {z.x - goal.x, z.y - goal.y, z.psi - goal.psi};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) J += e[i] * p.Q_z(i, j) * e[j];
  }
  double pv = u_prev.v, pd = u_prev.delta;
  for (const auto& u : plan.inputs) {
    const double w[2] = {u.v, u.delta};
    const double d[2] = {u.v - pv, u.delta - pd};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) J += w[i] * p.Q_u(i, j) * w[j] + d[i] * p.Q_du(i, j) * d[j];
    pv = u.v;
    pd = u.delta;
  }
  return J;
}

/// Random symmetric positive semidefinite matrix.
template <int Dim>
Eigen::Matrix<double, Dim, Dim> random_psd(std::mt19937_64& rng, double shift) {
  std::normal_distribution<double> g;
  Eigen::Matrix<double, Dim, Dim> A;
  for (int i = 0; i < Dim; ++i)
    for (int j = 0; j < Dim; ++j) A(i, j) = g(rng);
  return A * A.transpose() + shift * Eigen::Matrix<double, Dim, Dim>::Identity();
}

struct RandomInstance {
  RobotState z0, goal;
  ControlInput u_prev;
  MpcParams params;
  std::vector<ControlInput> inputs;
};

inline RandomInstance random_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-3, 3), ang(-3, 3), v(0, 2), d(-3, 3);
  RandomInstance in;
  in.z0 = {pos(rng), pos(rng), ang(rng)};
  in.goal = {pos(rng), pos(rng), ang(rng)};
  in.u_prev = {v(rng), d(rng)};
  in.params.Q_z = random_psd<3>(rng, 0.0);
  in.params.Q_u = random_psd<2>(rng, 0.1);
  in.params.Q_du = random_psd<2>(rng, 0.1);
  for (int k = 0; k < in.params.N; ++k) in.inputs.push_back({v(rng), d(rng)});
  return in;
}

/// Central differences of f over the 2N input coordinates.
template <typename F>
Eigen::MatrixXd central_difference(const std::vector<ControlInput>& u, F f, double h = 1e-6) {
  const Eigen::VectorXd f0 = f(u);
  Eigen::MatrixXd J(f0.size(), 2 * static_cast<Eigen::Index>(u.size()));
  for (std::size_t k = 0; k < u.size(); ++k) {
    for (int c = 0; c < 2; ++c) {
      auto up = u, dn = u;
      (c == 0 ? up[k].v : up[k].delta) += h;
      (c == 0 ? dn[k].v : dn[k].delta) -= h;
      J.col(2 * static_cast<Eigen::Index>(k) + c) = (f(up) - f(dn)) / (2 * h);
    }
  }
  return J;
}

}  // namespace oampc::oracle
