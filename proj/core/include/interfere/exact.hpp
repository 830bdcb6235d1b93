#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "interfere/posterior.hpp"
#include "interfere/reward_model.hpp"

namespace interfere {

/// Largest number of node pairs the enumeration oracle accepts (2^15 graphs).
inline constexpr std::size_t kMaxEnumeratedPairs = 15;

/// Posterior over every graph on n nodes with theta integrated out:
///   p(A | D) ∝ rho^|A| (1-rho)^(P-|A|) N(r; H mu0, s2 I + H S0 H').
/// Graph g has edge k (k-th pair in lexicographic order) iff bit k of g is set.
struct GraphPosterior {
  std::size_t n = 0;
  std::vector<double> probability;  // indexed by edge bitmask
  Eigen::MatrixXd marginals;        // symmetric, zero diagonal
};

/// Throws ParameterError when C(n, 2) > kMaxEnumeratedPairs.
GraphPosterior exact_graph_posterior(const History& history, const RewardSpec& spec,
                                     const Prior& prior);

Eigen::MatrixXd exact_edge_marginals(const History& history, const RewardSpec& spec,
                                     const Prior& prior);

}  // namespace interfere
