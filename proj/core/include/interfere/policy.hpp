#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "interfere/etc.hpp"
#include "interfere/gibbs.hpp"
#include "interfere/graph.hpp"
#include "interfere/optimizer.hpp"
#include "interfere/reward_model.hpp"
#include "interfere/rng.hpp"

namespace interfere {

enum class PolicyKind {
  gibbs_ts,            // joint (theta, A) sampling with edge-wise Gibbs sweeps
  etc_ts,              // isolation phase, thresholded graph, then TS under it
  known_a_ts,          // TS under the true graph
  no_interference_ts,  // TS under the empty graph
  uniform_random,      // uniformly random size-B set every round
};

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view name);

struct EtcSettings {
  std::size_t m = 0;  // rounds per node; 0 means etc_m(sigma, delta, n, T)
  double delta_gamma = 0.3;
  ThresholdRule rule = ThresholdRule::theorem;
};

struct PolicySpec {
  std::string label;
  PolicyKind kind = PolicyKind::gibbs_ts;
  std::optional<RewardKind> fit;  // defaults to the environment's kind
  std::size_t fit_d_max = 0;      // 0: inherit the environment's d_max
  double prior_mean = 0.0;
  double prior_var = 10.0;
  double noise_var = 0.0;  // 0: use the environment's sigma^2
  double rho = 0.3;
  std::size_t sweeps = 10;
  std::size_t warmup = 0;
  OptimizerMode optimizer;
  EdgeOrder edge_order = EdgeOrder::lexicographic;
  EtcSettings etc;
};

/// Fit spec a policy uses in an environment.
RewardSpec fit_spec(const PolicySpec& spec, const Environment& env);

/// Resolved isolation length for an ETC policy.
std::size_t resolved_etc_m(const PolicySpec& spec, const Environment& env, std::size_t horizon);

class Policy {
 public:
  virtual ~Policy() = default;

  /// Treatment for round t (0-based). Always satisfies ||z||_1 <= budget.
  virtual Treatment select(std::size_t t, Rng& rng) = 0;
  virtual void observe(const Treatment& z, std::span<const double> r) = 0;

  /// Graph the policy currently acts on (Gibbs sample, estimate or fixed graph).
  virtual std::optional<Adjacency> current_graph() const { return std::nullopt; }
  /// Posterior edge probabilities at the end of a run.
  virtual std::optional<Eigen::MatrixXd> edge_marginals(std::size_t sweeps, Rng& rng);
  /// Posterior mean of theta given the data and a fixed graph.
  virtual std::optional<Eigen::VectorXd> posterior_mean(const Adjacency&) { return std::nullopt; }
};

/// Builds a policy for `env`. The rng seeds the Gibbs chain's initial graph.
/// Throws ParameterError on inconsistent settings (budget > n, n m > T, ...).
std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const Environment& env,
                                    std::size_t budget, std::size_t horizon, Rng& rng);

/// Uniformly random subset of exactly min(k, n) nodes.
Treatment random_subset(std::size_t n, std::size_t k, Rng& rng);

}  // namespace interfere
