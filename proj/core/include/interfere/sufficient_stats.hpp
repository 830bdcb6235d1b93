#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "interfere/graph.hpp"
#include "interfere/reward_model.hpp"

namespace interfere {

/// Node l's share of the normal equations, H_l'H_l and H_l'r_l, restricted to
/// the theta entries its row can touch (sorted global indices).
struct NodeContribution {
  std::vector<std::size_t> index;
  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;
};

/// Incremental summary of a History that answers the two questions a Gibbs
/// sweep asks: the normal equations under a graph, and the endpoint evidence
/// of one edge. Both must agree with the reference scans in posterior.hpp.
class SufficientStats {
 public:
  explicit SufficientStats(RewardSpec spec) : spec_(spec) {}
  virtual ~SufficientStats() = default;

  const RewardSpec& spec() const noexcept { return spec_; }
  std::size_t rounds() const noexcept { return rounds_; }
  /// Bumped on every append.
  std::uint64_t version() const noexcept { return rounds_; }

  virtual void append(std::span<const std::uint8_t> z, std::span<const double> r) = 0;

  /// Cached per node; recomputed when data or the neighbor list changes.
  virtual const NodeContribution& node_contribution(std::size_t node,
                                                    std::span<const std::size_t> neighbors) = 0;

  /// sum_s sum_{l in {i,j}} [(r_sl - eta0_sl)^2 - (r_sl - eta1_sl)^2] where
  /// eta_b uses `a` with A_ij = b.
  virtual double edge_evidence(std::size_t i, std::size_t j, const Adjacency& a,
                               const Eigen::VectorXd& theta) = 0;

 protected:
  RewardSpec spec_;
  std::size_t rounds_ = 0;
};

/// Dense H'H and H'r under graph a, assembled from node contributions.
struct NormalEquations {
  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;
};
NormalEquations normal_equations(SufficientStats& stats, const Adjacency& a);

/// Every theta index node `node`'s row can touch under `neighbors`, sorted.
std::vector<std::size_t> reachable_indices(const RewardSpec& spec, std::size_t node,
                                           std::span<const std::size_t> neighbors);

/// Generic engine: rounds are merged by treatment pattern (count plus per-node
/// reward sums). Edge evidence skips patterns where the partner is untreated
/// whenever the reward kind allows it.
class PatternStats final : public SufficientStats {
 public:
  explicit PatternStats(RewardSpec spec);

  void append(std::span<const std::uint8_t> z, std::span<const double> r) override;
  const NodeContribution& node_contribution(std::size_t node,
                                            std::span<const std::size_t> neighbors) override;
  double edge_evidence(std::size_t i, std::size_t j, const Adjacency& a,
                       const Eigen::VectorXd& theta) override;

  std::size_t patterns() const noexcept { return count_.size(); }

 private:
  struct Cache {
    std::uint64_t version = ~std::uint64_t{0};
    std::vector<std::size_t> neighbors;
    NodeContribution value;
  };

  std::span<const std::uint8_t> pattern(std::size_t p) const {
    return {z_.data() + p * spec_.n, spec_.n};
  }
  double endpoint_evidence(std::size_t node, std::size_t partner, const Adjacency& a,
                           const Eigen::VectorXd& theta);

  std::unordered_map<std::string, std::size_t> lookup_;
  std::vector<std::uint8_t> z_;       // patterns x n
  std::vector<double> count_;         // rounds per pattern
  std::vector<double> rsum_;          // patterns x n
  std::vector<std::vector<std::size_t>> treated_in_;  // node -> patterns with Z_node = 1
  std::vector<std::size_t> round_pattern_;  // per round, for incremental refresh
  std::vector<double> r_log_;               // rounds x n
  std::vector<Cache> cache_;
  std::vector<int> slot_;             // scratch: global index -> local position
};

/// Engine for linear_in_means_per_node. Keeps G = sum_s Z_s Z_s' and
/// Q[l][k] = sum_s r_sl Z_sk, so a node's normal equations cost O(deg^2)
/// and an edge's evidence O(deg) independently of the number of rounds.
class LinearMeansStats final : public SufficientStats {
 public:
  explicit LinearMeansStats(RewardSpec spec);

  void append(std::span<const std::uint8_t> z, std::span<const double> r) override;
  const NodeContribution& node_contribution(std::size_t node,
                                            std::span<const std::size_t> neighbors) override;
  double edge_evidence(std::size_t i, std::size_t j, const Adjacency& a,
                       const Eigen::VectorXd& theta) override;

 private:
  struct Cache {
    std::uint64_t version = ~std::uint64_t{0};
    std::vector<std::size_t> neighbors;
    double pair_sum = 0.0;  // sum_{k,l in N} G[k][l]
    double zx = 0.0;        // sum_{k in N} G[node][k]
    double rx = 0.0;        // sum_{k in N} Q[node][k]
    std::vector<double> col;  // sum_{k in N} G[k][.]
    NodeContribution value;
  };

  double g(std::size_t k, std::size_t l) const { return gram_[k * spec_.n + l]; }
  double q(std::size_t node, std::size_t k) const { return cross_[node * spec_.n + k]; }
  double endpoint_evidence(std::size_t node, std::size_t partner, const Adjacency& a,
                           const Eigen::VectorXd& theta);
  Cache& refresh(std::size_t node, std::span<const std::size_t> neighbors);

  std::vector<double> gram_;   // n x n
  std::vector<double> cross_;  // n x n
  std::vector<Cache> cache_;
  std::vector<std::size_t> treated_;  // scratch
};

/// LinearMeansStats for linear_in_means_per_node, PatternStats otherwise.
std::unique_ptr<SufficientStats> make_stats(const RewardSpec& spec);

}  // namespace interfere
