#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>

#include "interfere/graph.hpp"
#include "interfere/posterior.hpp"
#include "interfere/reward_model.hpp"
#include "interfere/rng.hpp"

namespace interfere {

struct EstimandTriple {
  double tau_d = 0.0;
  double tau_i1 = 0.0;
  double tau_tte = 0.0;
};

/// Population estimands under (theta, a), with r_i(z) the expected reward:
///   tau_D   = mean_i [r_i(e_i) - r_i(0)]
///   tau_I1  = mean over non-isolated i of mean_{j in N_i} [r_i(e_j) - r_i(0)]
///             (0 when every node is isolated)
///   tau_TTE = mean_i [r_i(1) - r_i(0)]
EstimandTriple true_estimands(const RewardSpec& spec, const Eigen::VectorXd& theta,
                              const Adjacency& a);

/// Plug-in estimate: the estimand formulas at (theta_hat, a_hat).
inline EstimandTriple estimate_from_posterior(const Eigen::VectorXd& theta_hat,
                                              const RewardSpec& spec, const Adjacency& a_hat) {
  return true_estimands(spec, theta_hat, a_hat);
}

/// A_ij = 1{marginal_ij > threshold}. Throws ParameterError unless
/// 0 < threshold < 1.
Adjacency graph_point_estimate(const Eigen::MatrixXd& marginals, double threshold);

/// iid Bernoulli(treat_prob) designs with rewards from env, no budget.
/// treat_prob = 0 gives all-zero designs.
History randomized_phase(const Environment& env, std::size_t rounds, double treat_prob, Rng& rng);

struct OlsFit {
  Eigen::VectorXd theta;
  bool ridge = false;      // fallback taken
  double condition = 0.0;  // eigenvalue ratio of X'X (inf when singular)
};

/// Least squares on the stacked design under a_hat. Falls back to
/// (X'X + lambda I)^{-1} X'y when cond(X'X) > 1e10.
OlsFit estimate_ols(const History& history, const RewardSpec& spec, const Adjacency& a_hat,
                    double ridge_lambda);

inline constexpr double kRidgeConditionLimit = 1e10;

/// Root mean square error per estimand. Throws ParameterError on length
/// mismatch or empty input.
EstimandTriple rmse(std::span<const EstimandTriple> estimates,
                    std::span<const EstimandTriple> truths);

}  // namespace interfere
