#include "interfere/optimizer.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "interfere/detail/features.hpp"
#include "interfere/errors.hpp"

namespace interfere {

namespace {

constexpr double kTieTol = 1e-12;

// Total reward under incremental single-node toggles: flipping z_j only
// changes the rows of j and its neighbors.
class Evaluator {
 public:
  Evaluator(const RewardSpec& spec, const Eigen::VectorXd& theta, const Adjacency& a)
      : spec_(spec), theta_(theta), a_(a), z_(spec.n, 0), rows_(spec.n, 0.0) {
    for (std::size_t i = 0; i < spec.n; ++i) total_ += rows_[i] = row(i);
  }

  double total() const { return total_; }
  const Treatment& z() const { return z_; }
  std::size_t size() const { return size_; }

  void toggle(std::size_t j) {
    z_[j] ^= 1U;
    size_ += z_[j] ? 1 : -1;
    refresh(j);
    for (std::size_t k : a_.neighbors(j)) refresh(k);
  }

  void assign(const Treatment& z) {
    for (std::size_t j = 0; j < spec_.n; ++j)
      if (z_[j] != z[j]) toggle(j);
  }

 private:
  double row(std::size_t i) const {
    return detail::row_dot(spec_, theta_, z_, i, a_.neighbors(i));
  }
  void refresh(std::size_t i) {
    const double v = row(i);
    total_ += v - rows_[i];
    rows_[i] = v;
  }

  const RewardSpec& spec_;
  const Eigen::VectorXd& theta_;
  const Adjacency& a_;
  Treatment z_;
  std::vector<double> rows_;
  double total_ = 0.0;
  std::size_t size_ = 0;
};

// Lexicographic comparison of the index sets of two treatments.
bool lex_smaller(const Treatment& a, const Treatment& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return a[i] > b[i];
  return false;
}

bool better(double value, std::size_t size, const Treatment& z, const Choice& best,
            std::size_t best_size) {
  if (value > best.value + kTieTol) return true;
  if (value < best.value - kTieTol) return false;
  if (size != best_size) return size < best_size;
  return lex_smaller(z, best.z);
}

Choice enumerate(const RewardSpec& spec, const Eigen::VectorXd& theta, const Adjacency& a,
                 std::size_t budget) {
  Evaluator ev(spec, theta, a);
  Choice best{ev.z(), ev.total()};
  std::size_t best_size = 0;
  // Depth-first over index sets in lexicographic prefix order, so among equal
  // values of equal size the lexicographically smaller set is seen first.
  auto dfs = [&](auto&& self, std::size_t start) -> void {
    if (ev.size() == budget) return;
    for (std::size_t j = start; j < spec.n; ++j) {
      ev.toggle(j);
      if (ev.total() > best.value + kTieTol ||
          (ev.total() >= best.value - kTieTol && ev.size() < best_size)) {
        best = {ev.z(), ev.total()};
        best_size = ev.size();
      }
      self(self, j + 1);
      ev.toggle(j);
    }
  };
  dfs(dfs, 0);
  return best;
}

void climb(Evaluator& ev, std::size_t n, std::size_t budget, std::size_t max_iters) {
  for (std::size_t it = 0; it < max_iters; ++it) {
    double best_gain = kTieTol;
    std::size_t best_in = n, best_out = n;
    const double base = ev.total();
    for (std::size_t j = 0; j < n; ++j) {
      if (!ev.z()[j] && ev.size() >= budget) continue;
      ev.toggle(j);
      if (ev.total() - base > best_gain) {
        best_gain = ev.total() - base;
        best_in = ev.z()[j] ? j : n;
        best_out = ev.z()[j] ? n : j;
      }
      ev.toggle(j);
    }
    for (std::size_t out = 0; out < n; ++out) {
      if (!ev.z()[out]) continue;
      ev.toggle(out);
      for (std::size_t in = 0; in < n; ++in) {
        if (ev.z()[in] || in == out) continue;
        ev.toggle(in);
        if (ev.total() - base > best_gain) {
          best_gain = ev.total() - base;
          best_in = in;
          best_out = out;
        }
        ev.toggle(in);
      }
      ev.toggle(out);
    }
    if (best_in == n && best_out == n) return;
    if (best_out != n) ev.toggle(best_out);
    if (best_in != n) ev.toggle(best_in);
  }
}

Choice local_search(const RewardSpec& spec, const Eigen::VectorXd& theta, const Adjacency& a,
                    std::size_t budget, const OptimizerMode& mode, Rng& rng) {
  const std::size_t n = spec.n;
  Evaluator ev(spec, theta, a);
  Choice best{ev.z(), ev.total()};
  std::size_t best_size = 0;
  std::vector<std::size_t> order(n);
  const std::size_t restarts = std::max<std::size_t>(mode.restarts, 1);
  for (std::size_t r = 0; r < restarts; ++r) {
    Treatment start(n, 0);
    if (r > 0) {
      // Random subset of size budget.
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (std::size_t k = 0; k < budget; ++k) {
        const std::size_t pick = k + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n - k));
        std::swap(order[k], order[std::min(pick, n - 1)]);
        start[order[k]] = 1;
      }
    }
    ev.assign(start);
    climb(ev, n, budget, mode.max_iters);
    if (better(ev.total(), ev.size(), ev.z(), best, best_size)) {
      best = {ev.z(), ev.total()};
      best_size = ev.size();
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::automatic: return "auto";
    case OptimizerKind::exact_enumeration: return "exact_enumeration";
    case OptimizerKind::top_b: return "top_b";
    case OptimizerKind::swap_local_search: return "swap_local_search";
  }
  return "auto";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  for (auto k : {OptimizerKind::automatic, OptimizerKind::exact_enumeration, OptimizerKind::top_b,
                 OptimizerKind::swap_local_search})
    if (to_string(k) == name) return k;
  throw ParameterError("unknown optimizer '" + std::string(name) + "'");
}

std::size_t candidate_count(std::size_t n, std::size_t budget) {
  constexpr auto cap = std::numeric_limits<std::size_t>::max();
  std::size_t total = 0, term = 1;  // term = C(n, k)
  for (std::size_t k = 0; k <= std::min(budget, n); ++k) {
    if (total > cap - term) return cap;
    total += term;
    if (k == n) break;
    const std::size_t num = n - k, den = k + 1;
    if (term > cap / num) return cap;
    term = term * num / den;
  }
  return total;
}

Choice top_b(const ModularScores& scores, std::size_t budget) {
  const auto n = static_cast<std::size_t>(scores.s.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
    return scores.s[static_cast<Eigen::Index>(a)] > scores.s[static_cast<Eigen::Index>(b)];
  });
  Choice c{Treatment(n, 0), scores.c};
  for (std::size_t k = 0; k < std::min(budget, n); ++k) {
    const double s = scores.s[static_cast<Eigen::Index>(order[k])];
    if (!(s > 0.0)) break;
    c.z[order[k]] = 1;
    c.value += s;
  }
  return c;
}

Choice optimize_treatment(const RewardSpec& spec, const Eigen::VectorXd& theta,
                          const Adjacency& a, std::size_t budget, const OptimizerMode& mode,
                          Rng& rng) {
  if (static_cast<std::size_t>(theta.size()) != spec.dimension())
    throw ParameterError("optimizer: theta length does not match spec");
  if (a.size() != spec.n) throw ParameterError("optimizer: graph size does not match n");
  budget = std::min(budget, spec.n);

  OptimizerKind kind = mode.kind;
  if (kind == OptimizerKind::automatic) {
    if (is_collapsible(spec.kind))
      kind = OptimizerKind::top_b;
    else if (candidate_count(spec.n, budget) <= mode.max_candidates)
      kind = OptimizerKind::exact_enumeration;
    else
      kind = OptimizerKind::swap_local_search;
  }
  switch (kind) {
    case OptimizerKind::top_b: {
      const auto scores = modular_scores(spec, theta, a);
      if (!scores)
        throw ParameterError("top_b requires a collapsible reward kind, got " +
                             std::string(to_string(spec.kind)));
      Choice c = top_b(*scores, budget);
      c.value = total_reward(spec, theta, a, c.z);
      return c;
    }
    case OptimizerKind::exact_enumeration:
      if (candidate_count(spec.n, budget) > mode.max_candidates)
        throw ParameterError("exact enumeration would visit more than " +
                             std::to_string(mode.max_candidates) +
                             " candidate sets; use swap_local_search");
      return enumerate(spec, theta, a, budget);
    case OptimizerKind::swap_local_search:
    case OptimizerKind::automatic:
      break;
  }
  return local_search(spec, theta, a, budget, mode, rng);
}

}  // namespace interfere
