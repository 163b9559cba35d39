#pragma once

// Dense primal-dual interior-point solver for small inequality QPs:
//   min 1/2 x'Px + q'x  s.t.  Gx <= h

#include <Eigen/Core>

namespace oampc {

struct QpSettings {
  int max_iter = 60;
  double tol = 1e-9;
};

enum class QpStatus { kSolved, kMaxIter, kNumerical };

struct QpResult {
  QpStatus status = QpStatus::kNumerical;
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
  int iterations = 0;
};

/// P must be symmetric positive definite (or made so by the rows of G).
QpResult solve_qp(const Eigen::MatrixXd& P, const Eigen::VectorXd& q, const Eigen::MatrixXd& G,
                  const Eigen::VectorXd& h, const QpSettings& settings = {});

}  // namespace oampc
