#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "interfere/graph.hpp"
#include "interfere/linalg.hpp"
#include "interfere/posterior.hpp"
#include "interfere/reward_model.hpp"
#include "interfere/rng.hpp"
#include "interfere/sufficient_stats.hpp"

namespace interfere {

enum class EdgeOrder { lexicographic, random_scan };

struct GibbsOptions {
  std::size_t sweeps = 10;  // K
  EdgeOrder order = EdgeOrder::lexicographic;
  bool update_edges = true;  // false: theta-only sampling under a fixed graph
};

/// Chain state (theta, A) over the joint posterior, warm-started across
/// rounds. One sweep draws theta | A, D and then resamples every A_ij from
/// its full conditional, which only involves the streams of i and j.
///
/// theta is drawn block by block when the prior precision is block-diagonal
/// under the reward kind's parameter layout (per-node kinds); otherwise one
/// dense block is used. Factorizations are reused while neither the data nor
/// the graph restricted to a block has changed.
class GibbsSampler {
 public:
  GibbsSampler(const RewardSpec& spec, Prior prior, GibbsOptions options, Adjacency initial);

  void observe(std::span<const std::uint8_t> z, std::span<const double> r);
  void observe(std::span<const std::uint8_t> z, const Eigen::VectorXd& r) {
    observe(z, std::span<const double>(r.data(), static_cast<std::size_t>(r.size())));
  }

  /// options().sweeps alternations of (theta draw, edge pass). K = 0 is a no-op.
  void run(Rng& rng);
  void sweep(Rng& rng);
  void draw_theta(Rng& rng);
  /// One pass over all pairs. When `probs` is given, adds each pair's
  /// conditional probability P(A_ij = 1 | rest) to (i, j) and (j, i).
  void edge_pass(Rng& rng, Eigen::MatrixXd* probs = nullptr);

  /// Full-conditional log-odds of A_ij = 1 under the current theta and graph.
  double edge_logit(std::size_t i, std::size_t j);

  /// theta | A, D for the current graph.
  GaussianPosterior conditional_posterior();
  Eigen::VectorXd conditional_mean();

  /// Rao-Blackwellized edge marginals: continues the chain for `sweeps`
  /// sweeps and averages the per-edge conditional probabilities. Under a
  /// fixed graph, returns its 0/1 adjacency.
  Eigen::MatrixXd edge_marginals(std::size_t sweeps, Rng& rng);

  const Eigen::VectorXd& theta() const noexcept { return theta_; }
  const Adjacency& graph() const noexcept { return graph_; }
  const RewardSpec& spec() const noexcept { return spec_; }
  const Prior& prior() const noexcept { return prior_; }
  const GibbsOptions& options() const noexcept { return options_; }
  std::size_t rounds() const noexcept { return stats_->rounds(); }
  SufficientStats& stats() noexcept { return *stats_; }
  std::size_t blocks() const noexcept { return blocks_.size(); }

  void set_graph(const Adjacency& a);
  void set_theta(const Eigen::VectorXd& theta);

  /// A_ij ~iid Bern(rho), drawn in lexicographic pair order.
  static Adjacency draw_prior_graph(std::size_t n, double rho, Rng& rng);

 private:
  struct Block {
    std::vector<std::size_t> index;  // global theta indices
    Eigen::MatrixXd prior_precision;
    Eigen::VectorXd prior_shift;  // prior_precision * mu0 restricted to the block
    std::uint64_t epoch = 0;      // bumped when a member node's neighbors change
    std::uint64_t factored_version = ~std::uint64_t{0};
    std::uint64_t factored_epoch = ~std::uint64_t{0};
    JitteredCholesky chol;
    Eigen::VectorXd mean;
  };

  void factor(Block& b, std::size_t id);
  void touch(std::size_t node);
  void flip(std::size_t i, std::size_t j, bool value);

  RewardSpec spec_;
  Prior prior_;
  GibbsOptions options_;
  Adjacency graph_;
  std::unique_ptr<SufficientStats> stats_;
  std::vector<Block> blocks_;
  std::vector<std::size_t> block_of_node_;
  std::vector<std::vector<std::size_t>> nodes_of_block_;
  std::vector<std::size_t> local_;  // global index -> position in its block
  Eigen::VectorXd theta_;
  std::vector<Edge> pairs_;
};

}  // namespace interfere
