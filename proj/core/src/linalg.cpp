#include "interfere/linalg.hpp"

#include <cmath>

#include "interfere/errors.hpp"

namespace interfere {

JitteredCholesky::JitteredCholesky(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw NumericalError("cholesky: matrix is not square");
  llt_.compute(m);
  if (llt_.info() == Eigen::Success) return;

  const auto d = static_cast<double>(m.rows());
  const double mean_diag = m.trace() / d;
  const double scale = mean_diag > 0.0 && std::isfinite(mean_diag) ? mean_diag : 1.0;
  double eps = 1e-9 * scale;
  // First jittered attempt plus 8 doublings.
  for (int attempt = 0; attempt <= 8; ++attempt, eps *= 2.0) {
    Eigen::MatrixXd repaired = m;
    repaired.diagonal().array() += eps;
    llt_.compute(repaired);
    if (llt_.info() == Eigen::Success) {
      jitter_ = eps;
      return;
    }
  }
  throw NumericalError("cholesky: matrix not positive definite after maximum jitter");
}

Eigen::MatrixXd JitteredCholesky::inverse() const {
  return symmetrize(llt_.solve(Eigen::MatrixXd::Identity(llt_.rows(), llt_.cols())));
}

double JitteredCholesky::log_determinant() const {
  const Eigen::MatrixXd& l = llt_.matrixLLT();
  return 2.0 * l.diagonal().array().log().sum();
}

Eigen::VectorXd standard_normal_vector(Eigen::Index d, Rng& rng) {
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = standard_normal(rng);
  return v;
}

}  // namespace interfere
