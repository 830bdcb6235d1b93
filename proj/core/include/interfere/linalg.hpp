#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "interfere/rng.hpp"

namespace interfere {

/// Cholesky factorization with PD repair: on failure, adds
/// 1e-9 * (trace / D) * I and retries, doubling the jitter up to 8 times
/// before throwing NumericalError.
class JitteredCholesky {
 public:
  JitteredCholesky() = default;
  explicit JitteredCholesky(const Eigen::MatrixXd& m);

  Eigen::Index size() const { return llt_.rows(); }
  double jitter() const noexcept { return jitter_; }
  Eigen::MatrixXd lower() const { return llt_.matrixL(); }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return llt_.solve(b); }
  Eigen::MatrixXd inverse() const;

  /// L * eps for the factor L of m = L L'.
  Eigen::VectorXd lower_times(const Eigen::VectorXd& eps) const { return llt_.matrixL() * eps; }
  /// L'^{-1} eps, i.e. a N(0, m^{-1}) draw when eps ~ N(0, I).
  Eigen::VectorXd upper_solve(const Eigen::VectorXd& eps) const {
    return llt_.matrixU().solve(eps);
  }

  double log_determinant() const;

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_ = 0.0;
};

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

Eigen::VectorXd standard_normal_vector(Eigen::Index d, Rng& rng);

}  // namespace interfere
