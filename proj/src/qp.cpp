#include "oampc/qp.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace oampc {

namespace {

// Largest alpha in (0, 1] keeping v + alpha dv > 0.
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

}  // namespace

QpResult solve_qp(const Eigen::MatrixXd& P, const Eigen::VectorXd& q, const Eigen::MatrixXd& G,
                  const Eigen::VectorXd& h, const QpSettings& settings) {
  const Eigen::Index n = q.size();
  const Eigen::Index m = h.size();
  QpResult res;
  res.x = Eigen::VectorXd::Zero(n);
  if (m == 0) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(P);
    res.x = ldlt.solve(-q);
    res.status = ldlt.info() == Eigen::Success ? QpStatus::kSolved : QpStatus::kNumerical;
    return res;
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s = (h - G * x).cwiseMax(1.0);
  Eigen::VectorXd z = Eigen::VectorXd::Ones(m);
  const double scale_d = 1.0 + q.lpNorm<Eigen::Infinity>();
  const double scale_p = 1.0 + h.lpNorm<Eigen::Infinity>();

  Eigen::MatrixXd K(n, n);
  for (int it = 0; it < settings.max_iter; ++it) {
    res.iterations = it + 1;
    const Eigen::VectorXd rd = P * x + q + G.transpose() * z;
    const Eigen::VectorXd rp = G * x + s - h;
    const double mu = s.dot(z) / static_cast<double>(m);
    if (rd.lpNorm<Eigen::Infinity>() <= settings.tol * scale_d && rp.lpNorm<Eigen::Infinity>() <= settings.tol * scale_p &&
        mu <= settings.tol) {
      res.status = QpStatus::kSolved;
      break;
    }

    const Eigen::VectorXd w = z.cwiseQuotient(s);
    K = P;
    K.noalias() += G.transpose() * w.asDiagonal() * G;
    K.diagonal().array() += 1e-12;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) {
      res.status = QpStatus::kNumerical;
      break;
    }

    // rc is the complementarity residual s.z - target; returns (dx, ds, dz).
    const auto newton = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx, Eigen::VectorXd& ds, Eigen::VectorXd& dz) {
      const Eigen::VectorXd t = w.cwiseProduct(rp) - rc.cwiseQuotient(s);
      dx = llt.solve(-rd - G.transpose() * t);
      dz = w.cwiseProduct(G * dx) + t;
      ds = -(rc + s.cwiseProduct(dz)).cwiseQuotient(z);
    };

    Eigen::VectorXd dx, ds, dz;
    newton(s.cwiseProduct(z), dx, ds, dz);
    const double a_aff = std::min(max_step(s, ds), max_step(z, dz));
    const double mu_aff = (s + a_aff * ds).dot(z + a_aff * dz) / static_cast<double>(m);
    const double sigma = std::pow(mu_aff / mu, 3);

    const Eigen::VectorXd rc = s.cwiseProduct(z) + ds.cwiseProduct(dz) - Eigen::VectorXd::Constant(m, sigma * mu);
    newton(rc, dx, ds, dz);
    const double alpha = std::min(1.0, 0.99 * std::min(max_step(s, ds), max_step(z, dz)));
    x += alpha * dx;
    s += alpha * ds;
    z += alpha * dz;
    res.status = QpStatus::kMaxIter;
  }
  res.x = x;
  res.lambda = z;
  return res;
}

}  // namespace oampc
