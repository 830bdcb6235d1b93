#include "interfere/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "interfere/errors.hpp"
#include "interfere/policy.hpp"
#include "interfere/protocol.hpp"

namespace interfere {

std::uint64_t replication_seed(const ReplicationConfig& reps, std::size_t rep) {
  return reps.base_seed + 1000ULL * rep;
}

Environment build_environment(const EnvironmentConfig& cfg, std::uint64_t seed) {
  Rng rng = make_stream(seed, Stream::environment);
  GraphGenSpec g = cfg.graph;
  g.seed = rng();
  Environment env;
  env.graph = generate(g, cfg.n);
  env.spec = make_spec(cfg.reward.kind, env.graph.size(), cfg.reward.d_max);
  env.theta = sample_params(env.spec, cfg.protocol, rng);
  env.sigma = cfg.sigma;
  return env;
}

Choice true_optimum(const Environment& env, std::size_t budget) {
  OptimizerMode mode;
  if (is_collapsible(env.spec.kind)) {
    mode.kind = OptimizerKind::top_b;
  } else {
    mode.kind = OptimizerKind::exact_enumeration;
    if (candidate_count(env.spec.n, budget) > mode.max_candidates)
      throw ParameterError("true optimum is intractable: " + std::string(to_string(env.spec.kind)) +
                           " is not collapsible and C(n, <=B) exceeds the enumeration limit");
  }
  Rng unused(0);
  return optimize_treatment(env.spec, env.theta, env.graph, budget, mode, unused);
}

double PolicyRun::realized_total() const {
  double s = 0.0;
  for (const auto& r : rounds) s += r.realized;
  return s;
}

double PolicyRun::first_half_regret() const {
  const std::size_t half = rounds.size() / 2;
  return half ? rounds[half - 1].regret_cum : 0.0;
}

double PolicyRun::second_half_regret() const { return cumulative_regret() - first_half_regret(); }

const PolicyRun& ReplicationResult::policy(std::string_view label) const {
  for (const auto& p : policies)
    if (p.label == label) return p;
  throw ParameterError("no policy labelled '" + std::string(label) + "'");
}

namespace {

CausalRecord causal_record(const RunConfig& cfg, const Environment& env, const RewardSpec& fit,
                           const History& eval, const Adjacency& a_hat, Policy& policy) {
  CausalRecord rec;
  rec.truth = true_estimands(env.spec, env.theta, env.graph);
  const OlsFit hat = estimate_ols(eval, fit, a_hat, cfg.causal.ridge_lambda);
  const OlsFit tru = estimate_ols(eval, fit, env.graph, cfg.causal.ridge_lambda);
  rec.ols_hat = estimate_from_posterior(hat.theta, fit, a_hat);
  rec.ols_true = estimate_from_posterior(tru.theta, fit, env.graph);
  rec.ridge_hat = hat.ridge;
  rec.ridge_true = tru.ridge;
  if (auto mean = policy.posterior_mean(a_hat)) rec.posterior = estimate_from_posterior(*mean, fit, a_hat);
  return rec;
}

}  // namespace

ReplicationResult run_replication(const RunConfig& cfg, std::size_t rep, const RunOptions& options) {
  ReplicationResult out;
  out.rep = rep;
  out.seed = replication_seed(cfg.replications, rep);
  out.env = build_environment(cfg.environment, out.seed);
  out.env_hash = environment_hash(out.env);
  out.optimum = true_optimum(out.env, cfg.budget);
  const Environment& env = out.env;
  const std::size_t T = cfg.horizon;
  const double f_opt = out.optimum.value;

  std::optional<History> eval;
  Rng inference_base = make_stream(out.seed, Stream::inference);
  if (options.causal) {
    const double p = cfg.causal.treat_prob > 0.0
                         ? cfg.causal.treat_prob
                         : static_cast<double>(cfg.budget) / static_cast<double>(env.spec.n);
    eval = randomized_phase(env, cfg.causal.eval_horizon, p, inference_base);
  }

  for (const PolicySpec& ps : cfg.policies) {
    const auto start = std::chrono::steady_clock::now();
    Rng policy_rng = make_stream(out.seed, Stream::policy);
    Rng noise_rng = make_stream(out.seed, Stream::noise);
    Rng inference_rng = inference_base;
    auto policy = make_policy(ps, env, cfg.budget, T, policy_rng);

    PolicyRun run;
    run.label = ps.label;
    run.rounds.reserve(T);
    double cum = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const Treatment z = policy->select(t, policy_rng);
      RoundRecord rec;
      for (auto v : z) rec.n_treated += v;
      if (rec.n_treated > cfg.budget)
        throw std::logic_error("policy '" + ps.label + "' exceeded the budget at round " +
                               std::to_string(t));
      const Eigen::VectorXd r = sample_rewards(env, z, noise_rng);
      policy->observe(z, std::span<const double>(r.data(), static_cast<std::size_t>(r.size())));
      rec.f_chosen = total_reward(env.spec, env.theta, env.graph, z);
      rec.regret_inst = std::max(f_opt - rec.f_chosen, 0.0);
      cum += rec.regret_inst;
      rec.regret_cum = cum;
      rec.realized = r.sum();
      const bool snap = (cfg.snapshot_every > 0 && (t + 1) % cfg.snapshot_every == 0) || t + 1 == T;
      if (snap) {
        if (auto g = policy->current_graph()) {
          rec.f1_snapshot = edge_f1(*g, env.graph);
          rec.acc_snapshot = edge_accuracy(*g, env.graph);
        }
      }
      run.rounds.push_back(rec);
    }

    if (auto m = policy->edge_marginals(cfg.marginal_sweeps, inference_rng)) {
      run.a_hat = graph_point_estimate(*m, cfg.causal.threshold);
      run.final_f1 = edge_f1(*run.a_hat, env.graph);
      run.final_accuracy = edge_accuracy(*run.a_hat, env.graph);
      if (options.keep_marginals) run.marginals = std::move(*m);
      if (eval)
        run.causal = causal_record(cfg, env, fit_spec(ps, env), *eval, *run.a_hat, *policy);
    }
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.policies.push_back(std::move(run));
  }
  return out;
}

std::vector<ReplicationResult> run_replications(const RunConfig& cfg, std::size_t workers,
                                                const RunOptions& options) {
  const std::size_t count = cfg.replications.count;
  std::vector<ReplicationResult> results(count);
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < count;) {
      try {
        results[k] = run_replication(cfg, k, options);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<double> cumulative_regret(std::span<const double> gaps) {
  std::vector<double> out(gaps.size());
  double s = 0.0;
  for (std::size_t t = 0; t < gaps.size(); ++t) out[t] = s += std::max(gaps[t], 0.0);
  return out;
}

Quantiles describe(std::vector<double> v) {
  if (v.empty()) throw ParameterError("describe: empty input");
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  Quantiles out;
  out.median = q(0.5);
  out.q25 = q(0.25);
  out.q75 = q(0.75);
  double s = 0.0;
  for (double x : v) s += x;
  out.mean = s / static_cast<double>(v.size());
  const std::size_t cut = v.size() / 10;
  double ts = 0.0;
  for (std::size_t k = cut; k < v.size() - cut; ++k) ts += v[k];
  out.trimmed_mean = ts / static_cast<double>(v.size() - 2 * cut);
  return out;
}

std::vector<PolicySummary> summarize(const RunConfig& cfg,
                                     std::span<const ReplicationResult> results) {
  std::vector<PolicySummary> out;
  for (std::size_t p = 0; p < cfg.policies.size(); ++p) {
    PolicySummary s;
    s.label = cfg.policies[p].label;
    std::vector<double> f1, acc;
    for (const auto& r : results) {
      const PolicyRun& run = r.policies.at(p);
      s.final_regrets.push_back(run.cumulative_regret());
      f1.push_back(run.final_f1);
      acc.push_back(run.final_accuracy);
    }
    if (!results.empty()) {
      s.regret = describe(s.final_regrets);
      s.f1 = describe(f1);
      s.accuracy = describe(acc);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SweepCell> run_sweep(const RunConfig& cfg, std::string_view axis,
                                 std::span<const std::string> grid, std::size_t workers,
                                 const RunOptions& options) {
  if (grid.empty()) throw ConfigError("grid", "sweep grid is empty");
  std::vector<SweepCell> cells;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    SweepCell cell;
    cell.value = grid[k];
    cell.config = with_override(cfg, axis, grid[k]);
    if (!cfg.replications.matched_seeds) cell.config.replications.base_seed += 1'000'000ULL * k;
    cell.results = run_replications(cell.config, workers, options);
    for (const auto& r : cell.results) cell.env_hashes.push_back(r.env_hash);
    cell.summary = summarize(cell.config, cell.results);
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace interfere
