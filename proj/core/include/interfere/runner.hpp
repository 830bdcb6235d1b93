#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "interfere/causal.hpp"
#include "interfere/config.hpp"
#include "interfere/optimizer.hpp"
#include "interfere/reward_model.hpp"

namespace interfere {

/// Seed of replication `rep`: base + 1000 * rep.
std::uint64_t replication_seed(const ReplicationConfig& reps, std::size_t rep);

/// Ground truth of one replication. The graph seed and theta both come from
/// the environment stream, so every policy in a replication, and every cell
/// of a matched sweep, sees the same environment.
Environment build_environment(const EnvironmentConfig& cfg, std::uint64_t seed);

/// Exact argmax of the true total reward: top-B for collapsible kinds,
/// enumeration otherwise. Throws ParameterError when neither applies.
Choice true_optimum(const Environment& env, std::size_t budget);

struct RoundRecord {
  double regret_inst = 0.0;  // max(f_opt - f_chosen, 0)
  double regret_cum = 0.0;
  double f_chosen = 0.0;
  double realized = 0.0;  // sum of observed rewards this round
  std::size_t n_treated = 0;
  std::optional<double> f1_snapshot;
  std::optional<double> acc_snapshot;
};

struct CausalRecord {
  EstimandTriple truth;
  std::optional<EstimandTriple> posterior;  // plug-in (theta_hat | A_hat, A_hat)
  EstimandTriple ols_hat;                   // OLS under A_hat
  EstimandTriple ols_true;                  // OLS under A
  bool ridge_hat = false;
  bool ridge_true = false;
};

struct PolicyRun {
  std::string label;
  std::vector<RoundRecord> rounds;
  std::optional<Eigen::MatrixXd> marginals;
  std::optional<Adjacency> a_hat;  // thresholded marginals
  double final_f1 = 0.0;
  double final_accuracy = 0.0;
  std::optional<CausalRecord> causal;
  double seconds = 0.0;

  double cumulative_regret() const { return rounds.empty() ? 0.0 : rounds.back().regret_cum; }
  double realized_total() const;
  /// Regret accumulated over rounds [0, T/2) and [T/2, T).
  double first_half_regret() const;
  double second_half_regret() const;
};

struct ReplicationResult {
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  std::uint64_t env_hash = 0;
  Environment env;
  Choice optimum;
  std::vector<PolicyRun> policies;

  const PolicyRun& policy(std::string_view label) const;
};

struct RunOptions {
  bool causal = false;  // run the randomized evaluation phase after each policy
  bool keep_marginals = true;
};

ReplicationResult run_replication(const RunConfig& cfg, std::size_t rep,
                                  const RunOptions& options = {});

/// Runs replications 0..count-1 on up to `workers` threads. Results are in
/// replication order and do not depend on the worker count.
std::vector<ReplicationResult> run_replications(const RunConfig& cfg, std::size_t workers,
                                                const RunOptions& options = {});

/// Prefix sums of max(gap, 0).
std::vector<double> cumulative_regret(std::span<const double> gaps);

struct Quantiles {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double mean = 0.0;
  double trimmed_mean = 0.0;  // 10% off each end
};

/// Linear-interpolation quantiles. Throws ParameterError on empty input.
Quantiles describe(std::vector<double> values);

struct PolicySummary {
  std::string label;
  Quantiles regret;
  Quantiles f1;
  Quantiles accuracy;
  std::vector<double> final_regrets;  // one per replication
};

std::vector<PolicySummary> summarize(const RunConfig& cfg,
                                     std::span<const ReplicationResult> results);

struct SweepCell {
  std::string value;  // grid value as given
  RunConfig config;
  std::vector<std::uint64_t> env_hashes;
  std::vector<PolicySummary> summary;
  std::vector<ReplicationResult> results;
};

/// Runs one cell per grid value. With matched_seeds off, cell k's base seed
/// is offset by 1e6 * k.
std::vector<SweepCell> run_sweep(const RunConfig& cfg, std::string_view axis,
                                 std::span<const std::string> grid, std::size_t workers,
                                 const RunOptions& options = {});

// Output writers (output.cpp).

/// Per-replication CSV, graph, and marginals files plus summary.json and
/// manifest.json under `dir`. Returns the files written, relative to dir.
std::vector<std::string> write_run(const std::filesystem::path& dir, const RunConfig& cfg,
                                   std::span<const ReplicationResult> results);

/// sweep.csv (one row per cell and policy) plus each cell in its own
/// subdirectory.
std::vector<std::string> write_sweep(const std::filesystem::path& dir, const RunConfig& cfg,
                                     std::string_view axis, std::span<const SweepCell> cells);

/// Estimator comparison table: estimand, estimator, rmse.
std::vector<std::string> write_causal(const std::filesystem::path& dir,
                                      std::span<const ReplicationResult> results);

/// Thresholded graph and marginals per replication and policy, plus the
/// true graph and manifest.json.
std::vector<std::string> write_recovery(const std::filesystem::path& dir, const RunConfig& cfg,
                                        std::span<const ReplicationResult> results);

void write_round_csv(std::ostream& out, const PolicyRun& run, double f_opt);

}  // namespace interfere
