// Acceptance harness: `acceptance --criterion N` prints one PASS/FAIL line
// with the measured values and the pinned tolerances, and exits nonzero on
// FAIL.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "interfere/causal.hpp"
#include "interfere/config.hpp"
#include "interfere/etc.hpp"
#include "interfere/runner.hpp"
#include "interfere_cli/cli.hpp"

using namespace interfere;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

RunConfig bundled(const std::string& name) {
  return load_config(std::filesystem::path(INTERFERE_CONFIG_DIR) / (name + ".json"));
}

RunConfig keep_policies(RunConfig cfg, const std::vector<std::string>& labels) {
  std::erase_if(cfg.policies, [&](const PolicySpec& p) {
    return std::find(labels.begin(), labels.end(), p.label) == labels.end();
  });
  return cfg;
}

double median_regret(const RunConfig& cfg, const std::vector<ReplicationResult>& results,
                     const std::string& label) {
  for (const auto& s : summarize(cfg, results))
    if (s.label == label) return s.regret.median;
  throw std::logic_error("no policy " + label);
}

double median_of(std::vector<double> v) { return describe(std::move(v)).median; }

// median late-half regret over median early-half regret
double half_ratio(const std::vector<ReplicationResult>& results, const std::string& label) {
  std::vector<double> first, second;
  for (const auto& r : results) {
    first.push_back(r.policy(label).first_half_regret());
    second.push_back(r.policy(label).second_half_regret());
  }
  return median_of(second) / median_of(first);
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

constexpr std::size_t kWorkers = 1;

// 1. Gibbs edge marginals against enumeration. The specified instance
// (30 rounds, sigma 0.5) has every marginal within 1e-15 of 0 or 1, so a
// weak-signal instance with marginals away from the boundary runs too.
Verdict c1() {
  constexpr double kGap = 0.05, kSeconds = 120.0;
  Verdict v{true, ""};
  auto check = [&](const char* tag, std::uint64_t seed, std::size_t rounds, double sigma) {
    cli::OracleOptions o;
    o.seed = seed;
    o.rounds = rounds;
    o.sigma = sigma;
    const cli::OracleReport r = cli::oracle_check(o);
    int uncertain = 0;
    for (Eigen::Index i = 0; i < r.exact.rows(); ++i)
      for (Eigen::Index j = i + 1; j < r.exact.cols(); ++j) uncertain += r.exact(i, j) > 0.05 && r.exact(i, j) < 0.95;
    v.pass = v.pass && r.max_gap <= kGap && r.seconds < kSeconds;
    v.detail += fmt("%s seed %llu: max_gap %.4f (<= %.2f), %d/6 marginals in (0.05, 0.95), %.2fs (< %.0fs); ", tag,
                    static_cast<unsigned long long>(seed), r.max_gap, kGap, uncertain, r.seconds, kSeconds);
  };
  for (std::uint64_t seed : {7u, 8u, 9u}) check("specified", seed, 30, 0.5);
  for (std::uint64_t seed : {7u, 8u, 9u, 10u}) check("weak-signal (8 rounds, sigma 2)", seed, 8, 2.0);
  return v;
}

// 2. Head-to-head ordering, both xi regimes.
Verdict c2() {
  constexpr double kGibbsMax = 400, kEtcMin = 800, kRatio = 3, kMisspec = 5, kSeconds = 1800;
  const auto start = Clock::now();
  RunConfig small = keep_policies(bundled("head_to_head_small_xi"), {"gibbs_ts", "etc_ts"});
  small = with_override(small, "replications.count", "10");
  const auto rs = run_replications(small, kWorkers);
  const double g = median_regret(small, rs, "gibbs_ts"), e = median_regret(small, rs, "etc_ts");

  RunConfig large = keep_policies(bundled("head_to_head_large_xi"), {"gibbs_ts", "gibbs_ts_additive"});
  large = with_override(large, "replications.count", "10");
  const auto rl = run_replications(large, kWorkers);
  const double lg = median_regret(large, rl, "gibbs_ts"), la = median_regret(large, rl, "gibbs_ts_additive");
  const double secs = since(start);

  Verdict v;
  v.pass = g <= kGibbsMax && e >= kEtcMin && e / g >= kRatio && la >= kMisspec * lg && secs < kSeconds;
  v.detail = fmt(
      "small xi: gibbs %.1f (<= %.0f) etc %.1f (>= %.0f) ratio %.2f (>= %.0f); large xi: additive %.1f "
      "well-specified %.1f ratio %.2f (>= %.0f); %.0fs (< %.0fs)",
      g, kGibbsMax, e, kEtcMin, e / g, kRatio, la, lg, la / lg, kMisspec, secs, kSeconds);
  return v;
}

// 3. Sublinear regret for Gibbs-TS, linear for no-interference TS.
Verdict c3() {
  constexpr double kSublinear = 0.5, kLinear = 0.8;
  RunConfig h2h = keep_policies(bundled("head_to_head_small_xi"), {"gibbs_ts"});
  h2h = with_override(h2h, "replications.count", "10");
  const double gibbs = half_ratio(run_replications(h2h, kWorkers), "gibbs_ts");

  RunConfig village = keep_policies(bundled("village_synthetic"), {"no_interference_ts"});
  village = with_override(village, "replications.count", "5");
  village = with_override(village, "horizon", "4000");
  const double noint = half_ratio(run_replications(village, kWorkers), "no_interference_ts");

  Verdict v;
  v.pass = gibbs <= kSublinear && noint >= kLinear;
  v.detail = fmt("gibbs late/early %.3f (<= %.1f); no-interference late/early %.3f (>= %.1f)", gibbs,
                 kSublinear, noint, kLinear);
  return v;
}

// 4. Graph recovery and regret ordering at n = 20.
Verdict c4() {
  constexpr double kAccuracy = 0.99, kRatio = 50, kSeconds = 2700;
  const auto start = Clock::now();
  const RunConfig cfg = with_override(bundled("count_based_n20"), "replications.count", "10");
  const auto rs = run_replications(cfg, kWorkers);
  const double secs = since(start);
  double acc = 0.0;
  for (const auto& s : summarize(cfg, rs))
    if (s.label == "gibbs_ts") acc = s.accuracy.median;
  const double known = median_regret(cfg, rs, "known_a_ts"), gibbs = median_regret(cfg, rs, "gibbs_ts"),
               etc = median_regret(cfg, rs, "etc_ts");
  const double ratio = etc / std::max(known, 1e-12);
  Verdict v;
  v.pass = acc >= kAccuracy && known < gibbs && gibbs < etc && ratio >= kRatio && secs < kSeconds;
  v.detail = fmt("accuracy %.4f (>= %.2f); regret known %.2f < gibbs %.2f < etc %.2f; etc/known %.1f (>= %.0f); "
                 "%.0fs (< %.0fs)",
                 acc, kAccuracy, known, gibbs, etc, ratio, kRatio, secs, kSeconds);
  return v;
}

// 5. Calibrated ETC phase one.
Verdict c5() {
  constexpr int kRequired = 19;
  const std::size_t m = etc_m(0.5, 0.3, 8, 2000);
  int exact = 0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    Environment env;
    env.spec = make_spec(RewardKind::paired_indicator, 8);
    env.theta = Eigen::Vector2d(0.0, 1.0);
    GraphGenSpec g;
    g.p = 0.3;
    g.seed = 500 + rep;
    env.graph = generate(g, 8);
    env.sigma = 0.5;
    Rng noise = make_stream(500 + rep, Stream::noise);
    exact += etc_phase1(env, m, ThresholdRule::theorem, 0.3, noise).a_hat == env.graph;
  }
  Verdict v;
  v.pass = m == 262 && exact >= kRequired;
  v.detail = fmt("m %zu (= 262); exact recovery %d/20 (>= %d)", m, exact, kRequired);
  return v;
}

// Sweep helper: medians per cell and whether environments match per seed.
struct SweepOutcome {
  std::vector<double> medians;
  bool matched = true;
};

SweepOutcome sweep(const RunConfig& cfg, const std::string& axis, const std::vector<std::string>& grid) {
  const auto cells = run_sweep(cfg, axis, grid, kWorkers);
  SweepOutcome o;
  for (const auto& c : cells) {
    o.medians.push_back(median_regret(c.config, c.results, "gibbs_ts"));
    o.matched = o.matched && c.env_hashes == cells.front().env_hashes;
  }
  return o;
}

// 6. Edge prior robustness.
Verdict c6() {
  constexpr double kSpread = 2.5;
  const RunConfig cfg = with_override(bundled("rho_sensitivity"), "replications.count", "8");
  const SweepOutcome o = sweep(cfg, "rho", {"0.05", "0.3", "0.7"});
  const auto [lo, hi] = std::minmax_element(o.medians.begin(), o.medians.end());
  Verdict v;
  v.pass = *hi / *lo <= kSpread && o.matched;
  v.detail = fmt("medians %.1f %.1f %.1f; max/min %.2f (<= %.1f); env hashes %s", o.medians[0], o.medians[1],
                 o.medians[2], *hi / *lo, kSpread, o.matched ? "identical" : "DIFFER");
  return v;
}

// 7. Sweep count robustness.
Verdict c7() {
  constexpr double kSpread = 1.6;
  const RunConfig cfg = with_override(bundled("k_ablation"), "replications.count", "10");
  const SweepOutcome o = sweep(cfg, "K", {"1", "10", "50"});
  const auto [lo, hi] = std::minmax_element(o.medians.begin(), o.medians.end());
  Verdict v;
  v.pass = *hi / *lo <= kSpread && o.matched;
  v.detail = fmt("medians K=1 %.1f K=10 %.1f K=50 %.1f; max/min %.2f (<= %.1f)", o.medians[0], o.medians[1],
                 o.medians[2], *hi / *lo, kSpread);
  return v;
}

// 8. Downstream effect estimation.
Verdict c8() {
  constexpr double kRmse = 0.08;
  const RunConfig cfg = with_override(bundled("downstream_n20"), "replications.count", "8");
  RunOptions opts;
  opts.causal = true;
  const auto rs = run_replications(cfg, kWorkers, opts);
  std::vector<EstimandTriple> truth, post, ols_hat, ols_true;
  for (const auto& r : rs) {
    const CausalRecord& c = *r.policy("gibbs_ts").causal;
    truth.push_back(c.truth);
    post.push_back(*c.posterior);
    ols_hat.push_back(c.ols_hat);
    ols_true.push_back(c.ols_true);
  }
  const EstimandTriple p = rmse(post, truth), oh = rmse(ols_hat, truth), ot = rmse(ols_true, truth);
  Verdict v;
  v.pass = p.tau_d <= kRmse && p.tau_i1 <= kRmse && oh.tau_d <= kRmse && oh.tau_i1 <= kRmse &&
           oh.tau_tte >= ot.tau_tte;
  v.detail = fmt("posterior tau_D %.4f tau_I1 %.4f; OLS(A_hat) tau_D %.4f tau_I1 %.4f (all <= %.2f); "
                 "TTE OLS(A_hat) %.4f >= OLS(A) %.4f (posterior %.4f)",
                 p.tau_d, p.tau_i1, oh.tau_d, oh.tau_i1, kRmse, oh.tau_tte, ot.tau_tte, p.tau_tte);
  return v;
}

// 9. Lower-bound instance.
Verdict c9() {
  const RunConfig cfg = bundled("lower_bound_paired");
  const auto rs = run_replications(cfg, kWorkers);
  const auto& rounds = rs.front().policy("uniform_random").rounds;
  double sum = 0.0, sq = 0.0;
  for (const auto& r : rounds) {
    sum += r.regret_inst;
    sq += r.regret_inst * r.regret_inst;
  }
  const double t = static_cast<double>(rounds.size());
  const double mean = sum / t;
  const double se = std::sqrt((sq / t - mean * mean) / (t - 1));
  const double p = static_cast<double>(cfg.environment.n) / 2;
  const double want = rs.front().env.theta[1] * (p - 1) / p;
  Verdict v;
  v.pass = std::abs(mean - want) <= 3 * se;
  v.detail = fmt("mean regret per round %.4f, target %.4f, |diff| %.4f (<= 3 SE = %.4f) over %zu rounds", mean,
                 want, std::abs(mean - want), 3 * se, rounds.size());
  return v;
}

// 10. Scaling smoke test.
Verdict c10() {
  constexpr double kSeconds = 600, kSublinear = 0.5;
  const auto start = Clock::now();
  RunConfig cfg = keep_policies(bundled("linear_means_scaling"), {"gibbs_ts"});
  const auto rs = run_replications(cfg, kWorkers);
  const double secs = since(start);
  const double ratio = half_ratio(rs, "gibbs_ts");
  Verdict v;
  v.pass = secs < kSeconds && ratio <= kSublinear;
  v.detail = fmt("%.0fs (< %.0fs); gibbs late/early %.3f (<= %.1f); median regret %.1f", secs, kSeconds, ratio,
                 kSublinear, median_regret(cfg, rs, "gibbs_ts"));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int criterion = 0;
  app.add_option("--criterion", criterion, "criterion number 1-10")->required()->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Verdict()>> checks{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10};
  Verdict v;
  try {
    v = checks[static_cast<std::size_t>(criterion - 1)]();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  std::cout << "criterion " << criterion << ' ' << (v.pass ? "PASS" : "FAIL") << ": " << v.detail << std::endl;
  return v.pass ? 0 : 1;
}
