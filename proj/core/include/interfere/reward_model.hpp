#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "interfere/graph.hpp"
#include "interfere/rng.hpp"

namespace interfere {

/// Binary treatment vector, one byte per node (0 or 1).
using Treatment = std::vector<std::uint8_t>;

/// NIA-compatible reward parameterizations. Every kind is linear in theta;
/// the graph enters only through the design row of each node.
enum class RewardKind {
  linear_in_means_per_node,  // r_i = mu_i Z_i + beta_i * frac treated nbrs
  count_based_shared,        // r_i = mu Z_i + gamma_{min(d1_i, d_max)}
  count_based_per_node,      // r_i = mu_i Z_i + gamma_{i, min(d1_i, d_max)}
  pairwise_nia,              // mu_i Z_i + sum gamma_ij Z_j + sum xi_ijk Z_j Z_k
  additive_pairs,            // pairwise_nia without the xi block
  saturation_spec_a,         // mu_i Z_i 1{d1_i = 0} + sum gamma_ij Z_j
  interaction_spec_b,        // mu_i Z_i + sum gamma_ij Z_j + lambda_i Z_i d1_i
  paired_indicator,          // mu Z_i + gamma_1 1{d1_i = 1}
};

std::string_view to_string(RewardKind kind);
/// Throws ParameterError for unknown names.
RewardKind parse_reward_kind(std::string_view name);

struct RewardSpec {
  RewardKind kind = RewardKind::linear_in_means_per_node;
  std::size_t n = 0;
  std::size_t d_max = 0;  // count-based kinds only

  /// Length of theta. Pure function of (kind, n, d_max).
  std::size_t dimension() const;

  friend bool operator==(const RewardSpec&, const RewardSpec&) = default;
};

/// Validates and builds a spec (n >= 2; d_max >= 1 for count-based kinds).
RewardSpec make_spec(RewardKind kind, std::size_t n, std::size_t d_max = 0);

/// True when total reward is affine in Z for every graph and theta
/// (linear_in_means_per_node and additive_pairs).
bool is_collapsible(RewardKind kind);

/// True when A_ij can change node i's row only in rounds where Z_j = 1.
/// Holds for every kind except linear-in-means, whose neighbor fraction
/// depends on the degree.
bool edge_effect_requires_treated_partner(RewardKind kind);

/// Index of the unordered pair {a, b} (a != b) among C(m, 2) pairs in
/// lexicographic order.
inline std::size_t pair_index(std::size_t m, std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return a * (2 * m - a - 1) / 2 + (b - a - 1);
}

/// A nonzero entry of a design row.
struct Feature {
  std::size_t index;
  double value;
};

/// Named contiguous slice of theta (mu, beta, gamma, xi, lambda).
/// `period` > 0 marks bucket-indexed blocks: element e is bucket e % period + 1.
struct ThetaBlock {
  std::string name;
  std::size_t offset;
  std::size_t length;
  std::size_t period = 0;
};
std::vector<ThetaBlock> theta_blocks(const RewardSpec& spec);

/// Partition of theta into groups such that every design row touches a
/// single group. Per-node kinds split by node; all others are one group.
struct ParameterLayout {
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<std::size_t> block_of_node;
  std::vector<std::size_t> block_of_index;
  std::vector<std::size_t> local_index;
};
ParameterLayout parameter_layout(const RewardSpec& spec);

/// Nonzero features of node i's design row given its neighbor list (sorted).
void node_features(const RewardSpec& spec, std::span<const std::uint8_t> z,
                   std::size_t node, std::span<const std::size_t> neighbors,
                   std::vector<Feature>& out);

/// Dense design row of node i under graph a. Throws for i out of range.
Eigen::VectorXd design_row(const RewardSpec& spec, std::span<const std::uint8_t> z,
                           const Adjacency& a, std::size_t node);

/// n x D design matrix; row i equals design_row(spec, z, a, i).
Eigen::MatrixXd design_matrix(const RewardSpec& spec, std::span<const std::uint8_t> z,
                              const Adjacency& a);

/// Expected reward of one node given its neighbor list.
double node_reward(const RewardSpec& spec, const Eigen::VectorXd& theta,
                   std::span<const std::uint8_t> z, std::size_t node,
                   std::span<const std::size_t> neighbors);

/// H(z; a) theta.
Eigen::VectorXd expected_rewards(const RewardSpec& spec, const Eigen::VectorXd& theta,
                                 const Adjacency& a, std::span<const std::uint8_t> z);

/// 1' H(z; a) theta.
double total_reward(const RewardSpec& spec, const Eigen::VectorXd& theta,
                    const Adjacency& a, std::span<const std::uint8_t> z);

/// Ground-truth environment: rewards are H(z; graph) theta + N(0, sigma^2).
struct Environment {
  RewardSpec spec;
  Eigen::VectorXd theta;
  Adjacency graph;
  double sigma = 1.0;
};

/// Expected rewards plus iid Gaussian noise drawn from rng (n draws per call).
Eigen::VectorXd sample_rewards(const Environment& env, std::span<const std::uint8_t> z,
                               Rng& rng);

/// f(Z) = c + Z's for collapsible kinds.
struct ModularScores {
  double c = 0.0;
  Eigen::VectorXd s;
};

/// Returns the collapsed objective, or nullopt for kinds without an affine
/// total reward.
std::optional<ModularScores> modular_scores(const RewardSpec& spec,
                                            const Eigen::VectorXd& theta,
                                            const Adjacency& a);

std::uint64_t environment_hash(const Environment& env);

}  // namespace interfere
