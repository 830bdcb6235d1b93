#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "interfere/graph.hpp"
#include "interfere/reward_model.hpp"
#include "interfere/rng.hpp"

namespace interfere {

/// Joint prior: theta ~ N(mean, cov), A_ij ~iid Bern(rho), plus the noise
/// variance assumed by the likelihood.
struct Prior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd precision;
  double noise_var = 1.0;
  double rho = 0.5;

  /// Validates cov (symmetric PD), noise_var > 0 and rho in (0, 1).
  /// Throws ParameterError otherwise.
  static Prior make(Eigen::VectorXd mean, Eigen::MatrixXd cov, double noise_var, double rho);
  static Prior isotropic(std::size_t dim, double mean, double var, double noise_var, double rho);

  std::size_t dimension() const { return static_cast<std::size_t>(mean.size()); }
  double log_odds() const;
};

/// Append-only log of (Z_s, r_s) rounds.
class History {
 public:
  History() = default;
  explicit History(std::size_t n) : n_(n) {}

  void append(std::span<const std::uint8_t> z, std::span<const double> r);
  void append(std::span<const std::uint8_t> z, const Eigen::VectorXd& r) {
    append(z, std::span<const double>(r.data(), static_cast<std::size_t>(r.size())));
  }

  std::size_t nodes() const noexcept { return n_; }
  std::size_t rounds() const noexcept { return n_ ? z_.size() / n_ : 0; }
  bool empty() const noexcept { return z_.empty(); }

  std::span<const std::uint8_t> treatment(std::size_t s) const {
    return {z_.data() + s * n_, n_};
  }
  std::span<const double> rewards(std::size_t s) const { return {r_.data() + s * n_, n_}; }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> z_;
  std::vector<double> r_;
};

struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Conjugate update from the full stacked design (reference path):
///   cov  = (H'H / s2 + S0^{-1})^{-1}
///   mean = cov (H'r / s2 + S0^{-1} mu0)
/// Empty history returns the prior exactly.
GaussianPosterior theta_posterior(const History& history, const Adjacency& a,
                                  const RewardSpec& spec, const Prior& prior);

/// Posterior from accumulated normal equations (gram = H'H, rhs = H'r).
GaussianPosterior posterior_from_normal_equations(const Eigen::MatrixXd& gram,
                                                  const Eigen::VectorXd& rhs, const Prior& prior);

/// Exact draw mean + L eps with cov = L L' (jittered if needed).
Eigen::VectorXd sample_theta(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng);

/// Full-conditional log-odds of A_ij = 1 given theta, all other edges and the
/// history, scanning every round at the two endpoints (reference path):
///   log(rho/(1-rho)) + 1/(2 s2) sum_s sum_{l in {i,j}}
///       [(r_sl - eta0_sl)^2 - (r_sl - eta1_sl)^2]
double edge_logit(std::size_t i, std::size_t j, const Adjacency& a, const Eigen::VectorXd& theta,
                  const History& history, const RewardSpec& spec, const Prior& prior);

}  // namespace interfere
