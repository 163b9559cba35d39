#include "oampc/nmpc.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "oampc/qp.hpp"

namespace oampc {

namespace {

using Sens = Eigen::Matrix<double, 3, Eigen::Dynamic>;

bool is_psd(const Eigen::MatrixXd& Q, bool strict) {
  const Eigen::MatrixXd S = 0.5 * (Q + Q.transpose());
  const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S).eigenvalues().minCoeff();
  return strict ? lo > 0.0 : lo >= -1e-12;
}

// One inequality c(z_k) <= 0 on the state at step k.
struct Row {
  enum class Kind { kHalfspace, kCircle, kBound } kind = Kind::kHalfspace;
  int k = 1;
  Point2d n = Point2d::Zero();  // halfspace: c = offset - n.p ; circle: center
  double offset = 0.0;          // halfspace offset, circle radius, bound limit
  int axis = 0;                 // bound axis
  double sign = 1.0;            // +1 upper bound, -1 lower bound

  // Shifts the row so that its value at z becomes at most zero.
  void relax_at(const RobotState& z) {
    const double v = value(z, nullptr);
    if (v <= 0.0) return;
    if (kind == Kind::kBound) {
      offset += sign * v;
    } else {
      offset -= v;
    }
  }

  double value(const RobotState& z, Eigen::Vector3d* grad) const {
    const Point2d p = z.position();
    switch (kind) {
      case Kind::kHalfspace:
        if (grad) *grad << -n.x(), -n.y(), 0.0;
        return offset - n.dot(p);
      case Kind::kCircle: {
        const Point2d rel = p - n;
        const double d = rel.norm();
        if (grad) {
          const Point2d u = d > 1e-12 ? Point2d(rel / d) : Point2d::UnitX();
          *grad << -u.x(), -u.y(), 0.0;
        }
        return offset - d;
      }
      case Kind::kBound: {
        if (grad) {
          grad->setZero();
          (*grad)[axis] = sign;
        }
        return sign * (z.vec()[axis] - offset);
      }
    }
    return 0.0;
  }
};

double max_speed(const MpcParams& p) { return std::max(std::abs(p.u_min.v), std::abs(p.u_max.v)); }

// Planning margin on static circles. Rescanning moves circle centers along a
// surface by up to half the sample spacing, which can cut a few millimetres
// into a plan that hugged the previous scan's circles.
constexpr double kStaticMargin = 0.01;

// Constraint rows at steps k = from..to. Static circles that the robot cannot
// reach within k steps are dropped exactly. With `margin`, static radii are
// inflated, but never beyond the current clearance to that circle.
std::vector<Row> build_rows(const RobotState& z0, const ProjectionSet& proj, const std::vector<PointCloudCircle>& circles,
                            const MpcParams& p, int from, int to, bool prune, double margin = 0.0) {
  std::vector<Row> rows;
  const double d_dyn = p.d_safe + p.r_robot;
  for (int k = from; k <= to; ++k) {
    for (std::size_t r = 0; r < proj.num_sets(); ++r) {
      // ||p - z_proj|| >= d_safe + r_robot, and p stays on the outer side of
      // the set's supporting line through z_proj.
      const ProjectionEntry& e = proj.at(r, k);
      Row ball;
      ball.kind = Row::Kind::kCircle;
      ball.k = k;
      ball.n = e.z_proj;
      ball.offset = d_dyn;
      rows.push_back(ball);
      Row side;
      side.kind = Row::Kind::kHalfspace;
      side.k = k;
      side.n = e.normal;
      side.offset = e.normal.dot(e.z_proj);
      rows.push_back(side);
    }
    const double reach = k * p.dt * max_speed(p);
    for (const auto& c : circles) {
      const double R = p.d_safe_static + p.r_robot + c.radius;
      const double d0 = (c.center - z0.position()).norm();
      if (prune && d0 > R + margin + reach) continue;
      Row row;
      row.kind = Row::Kind::kCircle;
      row.k = k;
      row.n = c.center;
      row.offset = std::clamp(d0, R, R + margin);
      rows.push_back(row);
    }
    for (int a = 0; a < 3; ++a) {
      if (std::isfinite(p.z_max[a])) {
        rows.push_back({Row::Kind::kBound, k, Point2d::Zero(), p.z_max[a], a, 1.0});
      }
      if (std::isfinite(p.z_min[a])) {
        rows.push_back({Row::Kind::kBound, k, Point2d::Zero(), p.z_min[a], a, -1.0});
      }
    }
  }
  return rows;
}

// Rollout plus forward sensitivities Z_k = dz_k / d[u_0..u_{N-1}].
void rollout_sens(const RobotState& z0, const std::vector<ControlInput>& u, double dt, std::vector<RobotState>& z,
                  std::vector<Sens>* Z) {
  const int N = static_cast<int>(u.size());
  z.assign(static_cast<std::size_t>(N + 1), z0);
  if (Z) Z->assign(static_cast<std::size_t>(N + 1), Sens::Zero(3, 2 * N));
  for (int k = 0; k < N; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    z[ks + 1] = dynamics_step(z[ks], u[ks], dt);
    if (!Z) continue;
    const double c = std::cos(z[ks].psi);
    const double s = std::sin(z[ks].psi);
    Sens& next = (*Z)[ks + 1];
    const Sens& cur = (*Z)[ks];
    next = cur;
    next.row(0) += (-dt * u[ks].v * s) * cur.row(2);
    next.row(1) += (dt * u[ks].v * c) * cur.row(2);
    next(0, 2 * k) += dt * c;
    next(1, 2 * k) += dt * s;
    next(2, 2 * k + 1) += dt;
  }
}

struct CostEval {
  double J = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;  // Gauss-Newton
};

CostEval cost_eval(const std::vector<RobotState>& z, const std::vector<Sens>* Z, const std::vector<ControlInput>& u,
                   const RobotState& goal, const MpcParams& p, const ControlInput& u_prev) {
  const int N = static_cast<int>(u.size());
  const Eigen::Matrix3d Sz = p.Q_z + p.Q_z.transpose();
  const Eigen::Matrix2d Su = p.Q_u + p.Q_u.transpose();
  const Eigen::Matrix2d Sd = p.Q_du + p.Q_du.transpose();
  CostEval out;
  const Eigen::Vector3d g = goal.vec();
  for (const auto& zk : z) {
    const Eigen::Vector3d e = zk.vec() - g;
    out.J += e.dot(p.Q_z * e);
  }
  Eigen::Vector2d prev = u_prev.vec();
  for (const auto& uk : u) {
    const Eigen::Vector2d du = uk.vec() - prev;
    out.J += uk.vec().dot(p.Q_u * uk.vec()) + du.dot(p.Q_du * du);
    prev = uk.vec();
  }
  if (!Z) return out;

  out.grad = Eigen::VectorXd::Zero(2 * N);
  out.hess = Eigen::MatrixXd::Zero(2 * N, 2 * N);
  for (std::size_t k = 1; k < z.size(); ++k) {
    const Sens& Zk = (*Z)[k];
    out.grad.noalias() += Zk.transpose() * (Sz * (z[k].vec() - g));
    out.hess.noalias() += Zk.transpose() * Sz * Zk;
  }
  prev = u_prev.vec();
  for (int k = 0; k < N; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const Eigen::Vector2d uk = u[ks].vec();
    out.grad.segment<2>(2 * k) += Su * uk + Sd * (uk - prev);
    out.hess.block<2, 2>(2 * k, 2 * k) += Su + Sd;
    if (k + 1 < N) {
      out.grad.segment<2>(2 * k) -= Sd * (u[ks + 1].vec() - uk);
      out.hess.block<2, 2>(2 * k, 2 * k) += Sd;
      out.hess.block<2, 2>(2 * k, 2 * k + 2) -= Sd;
      out.hess.block<2, 2>(2 * k + 2, 2 * k) -= Sd;
    }
    prev = uk;
  }
  return out;
}

// Solver state over the free inputs u_0..u_{N-2}; u_{N-1} stays zero.
class Sqp {
 public:
  explicit Sqp(const NlpProblem& prob)
      : prob_(prob),
        p_(prob.params),
        N_(prob.params.N),
        n_(2 * (prob.params.N - 1)),
        rows_(build_rows(prob.z0, prob.projections, prob.static_circles, prob.params, 1, prob.params.N - 1, true,
                         kStaticMargin)) {
    lb_.resize(n_);
    ub_.resize(n_);
    scale_.resize(n_);
    for (int j = 0; j < N_ - 1; ++j) {
      lb_.segment<2>(2 * j) = p_.u_min.vec();
      ub_.segment<2>(2 * j) = p_.u_max.vec();
    }
    for (int i = 0; i < n_; ++i) {
      const double w = 0.5 * (ub_[i] - lb_[i]);
      scale_[i] = std::isfinite(w) && w > 0.0 ? w : 1.0;
    }
    if (prob.relax_violated) {
      for (Row& r : rows_) r.relax_at(prob.z0);
    }
    in_ws_.assign(rows_.size(), false);
  }

  SolveResult run() {
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult res = solve_impl();
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  }

 private:
  struct Point {
    Eigen::VectorXd U;
    std::vector<RobotState> z;
    std::vector<Sens> Z;
    Eigen::VectorXd c;
    double J = 0.0;
    double viol = 0.0;
    bool derivs = false;
  };

  std::vector<ControlInput> inputs(const Eigen::VectorXd& U) const {
    std::vector<ControlInput> u(static_cast<std::size_t>(N_));
    for (int j = 0; j < N_ - 1; ++j) u[static_cast<std::size_t>(j)] = {U[2 * j], U[2 * j + 1]};
    return u;
  }

  Point eval(const Eigen::VectorXd& U, bool derivs) const {
    Point pt;
    pt.U = U;
    pt.derivs = derivs;
    const std::vector<ControlInput> u = inputs(U);
    rollout_sens(prob_.z0, u, p_.dt, pt.z, derivs ? &pt.Z : nullptr);
    pt.J = cost_eval(pt.z, nullptr, u, prob_.goal, p_, prob_.u_prev).J;
    pt.c.resize(static_cast<Eigen::Index>(rows_.size()));
    pt.viol = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      pt.c[static_cast<Eigen::Index>(i)] = rows_[i].value(pt.z[static_cast<std::size_t>(rows_[i].k)], nullptr);
      pt.viol = std::max(pt.viol, pt.c[static_cast<Eigen::Index>(i)]);
    }
    if (rows_.empty()) pt.viol = 0.0;
    return pt;
  }

  void ensure_derivs(Point& pt) const {
    if (!pt.derivs) pt = eval(pt.U, true);
  }

  Eigen::VectorXd clamp(Eigen::VectorXd U) const { return U.cwiseMax(lb_).cwiseMin(ub_); }

  Eigen::VectorXd pack(const std::vector<ControlInput>& u) const {
    Eigen::VectorXd U(n_);
    for (int j = 0; j < N_ - 1; ++j) {
      U.segment<2>(2 * j) = j < static_cast<int>(u.size()) ? u[static_cast<std::size_t>(j)].vec() : Eigen::Vector2d::Zero();
    }
    return clamp(U);
  }

  // Pure-pursuit style rollout toward the goal at a fraction of top speed.
  Eigen::VectorXd heading_seek(double speed_scale) const {
    Eigen::VectorXd U(n_);
    RobotState z = prob_.z0;
    for (int j = 0; j < N_ - 1; ++j) {
      const Point2d to_goal = prob_.goal.position() - z.position();
      const double err = wrap_angle(std::atan2(to_goal.y(), to_goal.x()) - z.psi);
      const double dist = to_goal.norm();
      ControlInput u;
      u.delta = std::clamp(err / (2.0 * p_.dt), p_.u_min.delta, p_.u_max.delta);
      u.v = std::clamp(speed_scale * std::min(p_.u_max.v, dist / (2.0 * p_.dt)) * std::max(std::cos(err), 0.0),
                       p_.u_min.v, p_.u_max.v);
      U.segment<2>(2 * j) = u.vec();
      z = dynamics_step(z, u, p_.dt);
    }
    return clamp(U);
  }

  // Constant (v, delta) arcs stopped after j steps, and turn-then-straight
  // sequences; a deterministic global seed set for the local solver.
  std::vector<Eigen::VectorXd> library() const {
    std::vector<Eigen::VectorXd> out;
    const double vmax = p_.u_max.v;
    const double speeds[] = {0.25 * vmax, 0.5 * vmax, 0.75 * vmax, vmax};
    const double rates[] = {-1.0, -2.0 / 3.0, -1.0 / 3.0, -1.0 / 6.0, 0.0, 1.0 / 6.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
    const auto rate = [&](double f) { return f >= 0.0 ? f * p_.u_max.delta : -f * p_.u_min.delta; };
    for (double v : speeds) {
      for (double f : rates) {
        for (int j = 1; j < N_; ++j) {
          Eigen::VectorXd U = Eigen::VectorXd::Zero(n_);
          for (int i = 0; i < j; ++i) U.segment<2>(2 * i) << v, rate(f);
          out.push_back(clamp(U));
        }
        for (int m = 1; m <= 3 && m < N_ - 1; ++m) {
          for (double v_turn : {0.0, v}) {
            Eigen::VectorXd U = Eigen::VectorXd::Zero(n_);
            for (int i = 0; i < N_ - 1; ++i) U.segment<2>(2 * i) << (i < m ? v_turn : v), (i < m ? rate(f) : 0.0);
            out.push_back(clamp(U));
          }
        }
      }
    }
    return out;
  }

  // Linearized rows for the active/sticky working set.
  void linearize(const Point& pt, double gamma, std::vector<std::size_t>& idx, Eigen::MatrixXd& A) {
    idx.clear();
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (pt.c[static_cast<Eigen::Index>(i)] >= -gamma) in_ws_[i] = true;
      if (in_ws_[i]) idx.push_back(i);
    }
    A.resize(static_cast<Eigen::Index>(idx.size()), n_);
    Eigen::Vector3d gz;
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const Row& row = rows_[idx[r]];
      row.value(pt.z[static_cast<std::size_t>(row.k)], &gz);
      A.row(static_cast<Eigen::Index>(r)) = (gz.transpose() * pt.Z[static_cast<std::size_t>(row.k)]).leftCols(n_);
    }
  }

  // Adds rows violated at `trial`; returns true if any were missing.
  bool grow_working_set(const Point& trial, double tol) {
    bool grew = false;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (!in_ws_[i] && trial.c[static_cast<Eigen::Index>(i)] > tol) {
        in_ws_[i] = true;
        grew = true;
      }
    }
    return grew;
  }

  void box(const Eigen::VectorXd& U, double delta, Eigen::VectorXd& lo, Eigen::VectorXd& hi) const {
    lo = (lb_ - U).cwiseMax(-delta * scale_);
    hi = (ub_ - U).cwiseMin(delta * scale_);
  }

  bool on_trust_boundary(const Eigen::VectorXd& du, double delta) const {
    return (du.cwiseQuotient(scale_)).lpNorm<Eigen::Infinity>() >= 0.99 * delta;
  }

  // Minimizes the max constraint value until the iterate is feasible.
  bool phase_one(Point& cur, int& iters) {
    double delta = 0.5;
    const double margin = 1e-3;
    std::vector<std::size_t> idx;
    Eigen::MatrixXd A;
    for (int it = 0; it < 50 && cur.viol > accept_tol(); ++it, ++iters) {
      ensure_derivs(cur);
      linearize(cur, 0.3, idx, A);
      const Eigen::Index m = A.rows();
      Eigen::VectorXd lo, hi;
      box(cur.U, delta, lo, hi);
      Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n_ + 1, n_ + 1) * 1e-6;
      Eigen::VectorXd q = Eigen::VectorXd::Zero(n_ + 1);
      q[n_] = 1.0;
      Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m + 2 * n_ + 1, n_ + 1);
      Eigen::VectorXd h(m + 2 * n_ + 1);
      for (Eigen::Index r = 0; r < m; ++r) {
        G.row(r).head(n_) = A.row(r);
        G(r, n_) = -1.0;
        h[r] = -cur.c[static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)])];
      }
      G.block(m, 0, n_, n_).setIdentity();
      h.segment(m, n_) = hi;
      G.block(m + n_, 0, n_, n_) = -Eigen::MatrixXd::Identity(n_, n_);
      h.segment(m + n_, n_) = -lo;
      G(m + 2 * n_, n_) = -1.0;
      h[m + 2 * n_] = margin;
      const QpResult qp = solve_qp(P, q, G, h);
      if (qp.status == QpStatus::kNumerical) return false;
      const Eigen::VectorXd du = qp.x.head(n_);
      const double pred = cur.viol - std::max(qp.x[n_], -margin);
      if (pred <= 1e-9) {
        if (delta >= 4.0) return false;
        delta = std::min(4.0, 2.0 * delta);
        continue;
      }
      Point trial = eval(clamp(cur.U + du), false);
      if (grow_working_set(trial, cur.viol)) continue;
      const double rho = (cur.viol - trial.viol) / pred;
      if (rho > 0.1) {
        cur = std::move(trial);
        if (rho > 0.75 && on_trust_boundary(du, delta)) delta = std::min(4.0, 2.0 * delta);
      } else {
        delta *= 0.25;
        if (delta < 1e-6) return false;
      }
    }
    return cur.viol <= accept_tol();
  }

  // Feasible-iterate trust-region SQP on the cost.
  bool phase_two(Point& cur, int& iters) {
    double delta = 0.5;
    std::vector<std::size_t> idx;
    Eigen::MatrixXd A;
    while (iters < p_.max_iter) {
      ++iters;
      ensure_derivs(cur);
      const CostEval ce = cost_eval(cur.z, &cur.Z, inputs(cur.U), prob_.goal, p_, prob_.u_prev);
      const Eigen::VectorXd g = ce.grad.head(n_);
      Eigen::MatrixXd H = ce.hess.topLeftCorner(n_, n_);
      H.diagonal().array() += 1e-8;
      linearize(cur, 0.3, idx, A);
      const Eigen::Index m = A.rows();
      Eigen::VectorXd lo, hi;
      box(cur.U, delta, lo, hi);
      Eigen::MatrixXd G(m + 2 * n_, n_);
      Eigen::VectorXd h(m + 2 * n_);
      G.topRows(m) = A;
      for (Eigen::Index r = 0; r < m; ++r) h[r] = -cur.c[static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)])];
      G.block(m, 0, n_, n_).setIdentity();
      h.segment(m, n_) = hi;
      G.block(m + n_, 0, n_, n_) = -Eigen::MatrixXd::Identity(n_, n_);
      h.segment(m + n_, n_) = -lo;
      QpResult qp = solve_qp(H, g, G, h);
      if (qp.status == QpStatus::kNumerical) return true;
      Eigen::VectorXd du = qp.x;
      double pred = -(g.dot(du) + 0.5 * du.dot(H * du));
      if (pred <= p_.opt_tol * (1.0 + std::abs(cur.J)) || du.lpNorm<Eigen::Infinity>() <= 1e-10) return true;
      Point trial = eval(clamp(cur.U + du), false);
      // Second-order corrections: shift the linearized rows by the curvature
      // error seen at the trial point.
      Eigen::VectorXd hc = h;
      for (int soc = 0; soc < 3 && trial.viol > accept_tol(); ++soc) {
        if (grow_working_set(trial, accept_tol())) break;
        for (Eigen::Index r = 0; r < m; ++r) {
          const auto i = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]);
          const double err = trial.c[i] - cur.c[i] - A.row(r).dot(du);
          hc[r] -= std::max(err, 0.0) + 0.1 * accept_tol();
        }
        qp = solve_qp(H, g, G, hc);
        if (qp.status == QpStatus::kNumerical) break;
        du = qp.x;
        pred = -(g.dot(du) + 0.5 * du.dot(H * du));
        if (pred <= 0.0) break;
        trial = eval(clamp(cur.U + du), false);
      }
      if (trial.viol > accept_tol()) {
        if (grow_working_set(trial, accept_tol())) continue;
        delta *= 0.25;
        if (delta < 1e-6) return true;
        continue;
      }
      const double rho = (cur.J - trial.J) / pred;
      if (rho < 1e-4) {
        delta *= 0.25;
        if (delta < 1e-6) return true;
        continue;
      }
      cur = std::move(trial);
      if (rho < 0.25) {
        delta *= 0.25;
      } else if (rho > 0.75 && on_trust_boundary(du, delta)) {
        delta = std::min(4.0, 2.0 * delta);
      }
      if (delta < 1e-6) return true;
    }
    return false;
  }

  double accept_tol() const { return 0.5 * p_.feas_tol; }

  SolveResult solve_impl() {
    std::vector<Point> starts;
    starts.push_back(eval(pack(prob_.warm_start.inputs), false));
    starts.push_back(eval(Eigen::VectorXd::Zero(n_).cwiseMax(lb_).cwiseMin(ub_), false));
    starts.push_back(eval(heading_seek(1.0), false));
    starts.push_back(eval(heading_seek(0.5), false));
    for (const auto& U : library()) starts.push_back(eval(U, false));
    const Point* best = nullptr;
    for (const auto& s : starts) {
      if (s.viol > accept_tol()) continue;
      if (!best || s.J < best->J) best = &s;
    }
    bool feasible = best != nullptr;
    if (!best) {
      best = &*std::min_element(starts.begin(), starts.end(),
                                [](const Point& a, const Point& b) { return a.viol < b.viol; });
    }
    Point cur = *best;
    int iters = 0;
    if (!feasible) feasible = phase_one(cur, iters);

    SolveResult res;
    res.iterations = iters;
    if (!feasible) {
      res.status = SolveStatus::kInfeasible;
      res.plan = make_plan(prob_.z0, inputs(cur.U), p_.dt, prob_.stamp);
      res.objective = cur.J;
      res.max_violation = cur.viol;
      return res;
    }
    const bool converged = phase_two(cur, iters);
    res.iterations = iters;
    res.plan = make_plan(prob_.z0, inputs(cur.U), p_.dt, prob_.stamp);
    res.objective = cur.J;
    res.max_violation = cur.viol;
    res.status = converged ? SolveStatus::kOptimal : SolveStatus::kMaxIter;
    return res;
  }

  const NlpProblem& prob_;
  const MpcParams& p_;
  int N_;
  int n_;
  std::vector<Row> rows_;
  std::vector<bool> in_ws_;
  Eigen::VectorXd lb_, ub_, scale_;
};

}  // namespace

void MpcParams::validate() const {
  if (N < 2) throw std::invalid_argument("mpc.N must be >= 2");
  if (!(dt > 0.0)) throw std::invalid_argument("mpc.dt must be > 0");
  if (!(d_safe > 0.0)) throw std::invalid_argument("mpc.d_safe must be > 0");
  if (!(d_safe_static >= 0.0)) throw std::invalid_argument("mpc.d_safe_static must be >= 0");
  if (!(r_robot >= 0.0)) throw std::invalid_argument("mpc.r_robot must be >= 0");
  if (!is_psd(Q_z, false)) throw std::invalid_argument("mpc.Q_z must be positive semidefinite");
  if (!is_psd(Q_u, true)) throw std::invalid_argument("mpc.Q_u must be positive definite");
  if (!is_psd(Q_du, true)) throw std::invalid_argument("mpc.Q_du must be positive definite");
  if (!(u_min.v <= 0.0 && 0.0 <= u_max.v && u_min.delta <= 0.0 && 0.0 <= u_max.delta)) {
    // The terminal stop needs u = 0 to be admissible.
    throw std::invalid_argument("mpc input bounds must contain zero");
  }
  if ((z_min.array() > z_max.array()).any()) throw std::invalid_argument("mpc state bounds are empty");
  if (!(feas_tol > 0.0) || !(opt_tol > 0.0)) throw std::invalid_argument("mpc tolerances must be > 0");
  if (max_iter < 1) throw std::invalid_argument("mpc.max_iter must be >= 1");
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kMaxIter:
      return "max_iter";
  }
  return "unknown";
}

double FeasibilityReport::worst() const {
  return std::max({dynamics, initial, state_bounds, input_bounds, terminal, complementarity});
}

RobotState dynamics_step(const RobotState& z, const ControlInput& u, double dt) {
  return {z.x + dt * u.v * std::cos(z.psi), z.y + dt * u.v * std::sin(z.psi), z.psi + dt * u.delta};
}

std::vector<RobotState> rollout(const RobotState& z0, const std::vector<ControlInput>& inputs, double dt) {
  std::vector<RobotState> z;
  rollout_sens(z0, inputs, dt, z, nullptr);
  return z;
}

OpenLoopPlan make_plan(const RobotState& z0, const std::vector<ControlInput>& inputs, double dt, double stamp) {
  return {rollout(z0, inputs, dt), inputs, stamp};
}

double total_cost(const OpenLoopPlan& plan, const RobotState& goal, const MpcParams& params, const ControlInput& u_prev) {
  return cost_eval(plan.states, nullptr, plan.inputs, goal, params, u_prev).J;
}

Eigen::VectorXd cost_gradient(const RobotState& z0, const std::vector<ControlInput>& inputs, const RobotState& goal,
                              const MpcParams& params, const ControlInput& u_prev) {
  std::vector<RobotState> z;
  std::vector<Sens> Z;
  rollout_sens(z0, inputs, params.dt, z, &Z);
  return cost_eval(z, &Z, inputs, goal, params, u_prev).grad;
}

ConstraintEval evaluate_constraints(const NlpProblem& problem, const std::vector<ControlInput>& inputs) {
  const MpcParams& p = problem.params;
  const std::vector<Row> rows = build_rows(problem.z0, problem.projections, problem.static_circles, p, 1, p.N - 1, true);
  std::vector<RobotState> z;
  std::vector<Sens> Z;
  rollout_sens(problem.z0, inputs, p.dt, z, &Z);
  ConstraintEval out;
  out.c.resize(static_cast<Eigen::Index>(rows.size()));
  out.jac.resize(static_cast<Eigen::Index>(rows.size()), 2 * static_cast<Eigen::Index>(inputs.size()));
  Eigen::Vector3d gz;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto k = static_cast<std::size_t>(rows[i].k);
    out.c[static_cast<Eigen::Index>(i)] = rows[i].value(z[k], &gz);
    out.jac.row(static_cast<Eigen::Index>(i)) = gz.transpose() * Z[k];
  }
  return out;
}

SolveResult solve(const NlpProblem& problem) {
  problem.params.validate();
  if (problem.projections.num_sets() > 0 && problem.projections.horizon < problem.params.N) {
    throw std::invalid_argument("solve: projection horizon shorter than N");
  }
  Sqp sqp(problem);
  SolveResult res = sqp.run();
  if (res.status != SolveStatus::kInfeasible && !problem.relax_violated) {
    const FeasibilityReport rep =
        check_feasibility(res.plan, problem.z0, problem.projections, problem.static_circles, problem.params);
    if (!rep.feasible(problem.params.feas_tol)) res.status = SolveStatus::kInfeasible;
  }
  return res;
}

FeasibilityReport check_feasibility(const OpenLoopPlan& plan, const RobotState& z0, const ProjectionSet& projections,
                                    const std::vector<PointCloudCircle>& static_circles, const MpcParams& params) {
  return check_feasibility(plan, z0, projections, static_circles, params, {});
}

FeasibilityReport check_feasibility(const OpenLoopPlan& plan, const RobotState& z0, const ProjectionSet& projections,
                                    const std::vector<PointCloudCircle>& static_circles, const MpcParams& params,
                                    const std::vector<ReachableSets>& history) {
  FeasibilityReport rep;
  const int N = plan.horizon();
  if (static_cast<int>(plan.states.size()) != N + 1) throw std::invalid_argument("check_feasibility: malformed plan");
  if (projections.num_sets() > 0 && projections.horizon < N) {
    throw std::invalid_argument("check_feasibility: projection horizon shorter than plan");
  }
  rep.initial = (plan.states[0].vec() - z0.vec()).norm();
  for (int k = 0; k < N; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const RobotState f = dynamics_step(plan.states[ks], plan.inputs[ks], params.dt);
    rep.dynamics = std::max(rep.dynamics, (plan.states[ks + 1].vec() - f.vec()).norm());
    const ControlInput& u = plan.inputs[ks];
    rep.input_bounds = std::max({rep.input_bounds, params.u_min.v - u.v, u.v - params.u_max.v,
                                 params.u_min.delta - u.delta, u.delta - params.u_max.delta});
  }
  rep.terminal = (plan.states[static_cast<std::size_t>(N)].vec() - plan.states[static_cast<std::size_t>(N - 1)].vec()).norm();

  MpcParams no_bounds = params;
  no_bounds.z_min.setConstant(-std::numeric_limits<double>::infinity());
  no_bounds.z_max.setConstant(std::numeric_limits<double>::infinity());
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const auto row_max = [&](const std::vector<Row>& rows) {
    std::vector<double> out(static_cast<std::size_t>(N), kNegInf);
    for (const Row& row : rows) {
      auto& gk = out[static_cast<std::size_t>(row.k - 1)];
      gk = std::max(gk, row.value(plan.states[static_cast<std::size_t>(row.k)], nullptr));
    }
    return out;
  };
  const std::vector<double> g_static = row_max(build_rows(z0, ProjectionSet{}, static_circles, no_bounds, 1, N, false));
  std::vector<double> g_dyn = row_max(build_rows(z0, projections, {}, no_bounds, 1, N, false));
  // Sets built j steps ago bound the same agents at their index k + j, so a
  // point is clear of the agents once it clears one generation entirely.
  const double d_dyn = params.d_safe + params.r_robot;
  for (std::size_t j = 1; j <= history.size(); ++j) {
    const ReachableSets& old = history[j - 1];
    for (int k = 1; k <= N; ++k) {
      const int idx = k + static_cast<int>(j);
      if (idx > N) break;
      const Point2d pk = plan.states[static_cast<std::size_t>(k)].position();
      double v = kNegInf;
      for (const auto& f : old.capsules) {
        if (idx <= f.horizon()) v = std::max(v, d_dyn - dist_point_capsule(pk, f.at(idx)).distance);
      }
      for (const auto& f : old.disks) {
        if (idx <= f.horizon()) v = std::max(v, d_dyn - dist_point_disk(pk, f.at(idx)).distance);
      }
      auto& gk = g_dyn[static_cast<std::size_t>(k - 1)];
      gk = std::min(gk, v);
    }
  }
  rep.g.resize(static_cast<std::size_t>(N));
  for (std::size_t i = 0; i < rep.g.size(); ++i) rep.g[i] = std::max(g_static[i], g_dyn[i]);
  for (int k = 1; k <= N; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const Eigen::Vector3d z = plan.states[ks].vec();
    for (int a = 0; a < 3; ++a) {
      rep.state_bounds = std::max({rep.state_bounds, z[a] - params.z_max[a], params.z_min[a] - z[a]});
    }
    const double moved = (z - plan.states[ks - 1].vec()).norm();
    rep.complementarity = std::max(rep.complementarity, moved * std::max(rep.g[ks - 1], 0.0));
  }
  return rep;
}

OpenLoopPlan fallback_plan(const OpenLoopPlan& prev, double dt) {
  const int N = prev.horizon();
  if (N < 1 || static_cast<int>(prev.states.size()) != N + 1) throw std::invalid_argument("fallback_plan: malformed plan");
  std::vector<ControlInput> u(prev.inputs.begin() + 1, prev.inputs.end());
  u.push_back(prev.inputs.back());
  return make_plan(prev.states[1], u, dt, prev.stamp + dt);
}

OpenLoopPlan stationary_plan(const RobotState& z0, int N, double stamp) {
  return {std::vector<RobotState>(static_cast<std::size_t>(N + 1), z0),
          std::vector<ControlInput>(static_cast<std::size_t>(N)), stamp};
}

}  // namespace oampc
