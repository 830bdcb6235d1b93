#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string_view>

#include "interfere/graph.hpp"
#include "interfere/reward_model.hpp"
#include "interfere/rng.hpp"

namespace interfere {

enum class OptimizerKind {
  automatic,          // top_b when collapsible, else enumeration if small enough, else local search
  exact_enumeration,  // all subsets of size 0..B
  top_b,              // collapsible kinds only
  swap_local_search,  // single toggles and swaps, best over restarts
};

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view name);

struct OptimizerMode {
  OptimizerKind kind = OptimizerKind::automatic;
  std::size_t max_candidates = 1'000'000;
  std::size_t restarts = 20;
  std::size_t max_iters = 200;
};

struct Choice {
  Treatment z;
  double value = 0.0;  // 1' H(z; a) theta
};

/// argmax of total expected reward over ||z||_1 <= budget. Ties go to the
/// smaller set, then to the lexicographically smaller index set. The rng is
/// consumed only by local-search restarts.
///
/// Throws ParameterError for top_b on a non-collapsible kind, or for
/// enumeration when the number of candidate sets exceeds max_candidates.
Choice optimize_treatment(const RewardSpec& spec, const Eigen::VectorXd& theta,
                          const Adjacency& a, std::size_t budget, const OptimizerMode& mode,
                          Rng& rng);

/// Number of subsets of size <= budget, saturating at SIZE_MAX.
std::size_t candidate_count(std::size_t n, std::size_t budget);

Choice top_b(const ModularScores& scores, std::size_t budget);

}  // namespace interfere
