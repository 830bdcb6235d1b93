#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "interfere/config.hpp"
#include "interfere/errors.hpp"
#include "interfere/runner.hpp"
#include "oracle.hpp"

using namespace interfere;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"({
  "name": "small",
  "environment": {
    "n": 6, "sigma": 0.5,
    "graph": {"family": "erdos_renyi", "p": 0.4},
    "reward": {"kind": "count_based_shared", "d_max": 3},
    "protocol": "count_based"
  },
  "horizon": 60,
  "budget": 2,
  "snapshot_every": 10,
  "marginal_sweeps": 5,
  "policies": [
    {"label": "gibbs", "kind": "gibbs_ts", "rho": 0.3, "sweeps": 3},
    {"label": "etc", "kind": "etc_ts", "etc": {"m": 2, "delta_gamma": 1.0}},
    {"label": "known", "kind": "known_a_ts"}
  ],
  "replications": {"count": 3, "base_seed": 11}
})";

const char* kPaired = R"({
  "environment": {
    "n": 8, "sigma": 0.5,
    "graph": {"family": "planted_pair"},
    "reward": {"kind": "paired_indicator"},
    "protocol": "paired"
  },
  "horizon": 5000,
  "budget": 1,
  "policies": [{"label": "uniform", "kind": "uniform_random"}],
  "replications": {"count": 1, "base_seed": 3}
})";

std::string csv_of(const ReplicationResult& r, std::string_view label) {
  std::ostringstream out;
  write_round_csv(out, r.policy(label), r.optimum.value);
  return out.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("interfere_runner_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("replication seeds") {
  ReplicationConfig r;
  r.base_seed = 42;
  CHECK(replication_seed(r, 0) == 42);
  CHECK(replication_seed(r, 3) == 3042);
}

TEST_CASE("cumulative regret") {
  const std::vector<double> zeros(5, 0.0);
  CHECK(cumulative_regret(zeros) == zeros);
  const std::vector<double> g(4, 1.5);
  CHECK(cumulative_regret(g) == std::vector<double>{1.5, 3.0, 4.5, 6.0});
  const std::vector<double> neg{1.0, -1.0, 2.0};
  CHECK(cumulative_regret(neg) == std::vector<double>{1.0, 1.0, 3.0});
}

TEST_CASE("quantile summary") {
  const Quantiles q = describe({4.0, 1.0, 3.0, 2.0});
  CHECK(q.median == 2.5);
  CHECK(q.q25 == 1.75);
  CHECK(q.q75 == 3.25);
  CHECK(q.mean == 2.5);
  std::vector<double> ten{100, 1, 2, 3, 4, 5, 6, 7, 8, -50};
  CHECK(describe(ten).trimmed_mean == doctest::Approx(4.5));
  CHECK(describe({7.0}).median == 7.0);
  CHECK_THROWS_AS(describe({}), ParameterError);
}

TEST_CASE("true optimum examples") {
  Environment env;
  env.spec = make_spec(RewardKind::pairwise_nia, 5);
  env.theta = Eigen::VectorXd::Zero(env.spec.dimension());
  env.graph = Adjacency::complete(5);
  const Choice zero = true_optimum(env, 2);
  CHECK(zero.value == 0.0);
  CHECK(zero.z == Treatment(5, 0));

  Environment pair;
  pair.spec = make_spec(RewardKind::paired_indicator, 8);
  pair.theta = Eigen::Vector2d(0.0, 1.0);
  const std::vector<Edge> e{{4, 5}};
  pair.graph = Adjacency::from_edges(8, e);
  const Choice c = true_optimum(pair, 1);
  CHECK(c.value == 1.0);
  CHECK(c.z == Treatment{0, 0, 0, 0, 1, 0, 0, 0});

  Environment big;
  big.spec = make_spec(RewardKind::pairwise_nia, 40);
  big.theta = Eigen::VectorXd::Zero(big.spec.dimension());
  big.graph = Adjacency(40);
  CHECK_THROWS_AS(true_optimum(big, 10), ParameterError);
}

TEST_CASE("collapsible true optimum matches enumeration") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 6 + trial % 7;
    Environment env;
    env.spec = make_spec(RewardKind::linear_in_means_per_node, n);
    env.theta = sample_params(env.spec, builtin_protocol("village"), rng);
    env.graph = oracle::random_graph(n, 0.3, rng);
    const int budget = (n + 4) / 5;
    const Choice c = true_optimum(env, budget);
    double best = -INFINITY;
    const Eigen::MatrixXi A = oracle::dense(env.graph);
    for (unsigned mask = 0; mask < (1U << n); ++mask) {
      if (std::popcount(mask) > budget) continue;
      Treatment z(n);
      for (int j = 0; j < n; ++j) z[j] = (mask >> j) & 1U;
      best = std::max(best, oracle::total(env.spec.kind, n, 0, env.theta, A, z));
    }
    CHECK(c.value == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("replications are deterministic and independent of worker count") {
  const RunConfig cfg = parse_config(kSmall);
  const auto serial = run_replications(cfg, 1);
  const auto again = run_replications(cfg, 1);
  const auto parallel = run_replications(cfg, 3);
  REQUIRE(serial.size() == 3);
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(serial[r].rep == r);
    CHECK(parallel[r].rep == r);
    for (const char* label : {"gibbs", "etc", "known"}) {
      CHECK(csv_of(serial[r], label) == csv_of(again[r], label));
      CHECK(csv_of(serial[r], label) == csv_of(parallel[r], label));
    }
  }
}

TEST_CASE("round records are consistent") {
  const RunConfig cfg = parse_config(kSmall);
  const ReplicationResult r = run_replication(cfg, 1);
  CHECK(r.seed == 1011);
  CHECK(r.env_hash == environment_hash(r.env));
  for (const auto& run : r.policies) {
    REQUIRE(run.rounds.size() == 60);
    double cum = 0.0;
    for (std::size_t t = 0; t < 60; ++t) {
      const auto& rec = run.rounds[t];
      CHECK(rec.regret_inst >= 0.0);
      CHECK(rec.f_chosen <= r.optimum.value + 1e-12);
      CHECK(rec.n_treated <= 2);
      cum += rec.regret_inst;
      CHECK(rec.regret_cum == doctest::Approx(cum));
      const bool snap = (t + 1) % 10 == 0;
      const bool has_graph = run.label != "etc" || t >= 12;  // etc has no graph during its 12 isolation rounds
      CHECK(rec.f1_snapshot.has_value() == (snap && has_graph));
    }
    CHECK(run.first_half_regret() + run.second_half_regret() == doctest::Approx(run.cumulative_regret()));
  }
  CHECK(r.policy("known").final_f1 == 1.0);
  CHECK_THROWS_AS(r.policy("nobody"), ParameterError);
}

TEST_CASE("round csv layout") {
  const RunConfig cfg = parse_config(kSmall);
  const ReplicationResult r = run_replication(cfg, 0);
  std::istringstream in(csv_of(r, "gibbs"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,regret_inst,regret_cum,f_opt,f_chosen,n_treated,f1_snapshot,acc_snapshot");
  std::getline(in, line);
  CHECK(line.rfind("1,", 0) == 0);
  CHECK(line.substr(line.size() - 2) == ",,");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 60);
}

TEST_CASE("matched sweeps hold the environment fixed") {
  const RunConfig cfg = parse_config(kSmall);
  const std::vector<std::string> grid{"0.05", "0.3", "0.7"};
  const auto cells = run_sweep(cfg, "rho", grid, 1);
  REQUIRE(cells.size() == 3);
  for (const auto& c : cells) CHECK(c.env_hashes == cells[0].env_hashes);
  CHECK(cells[2].config.policies[0].rho == 0.7);
  CHECK(cells[0].summary.size() == 3);

  RunConfig unmatched = cfg;
  unmatched.replications.matched_seeds = false;
  const auto loose = run_sweep(unmatched, "rho", grid, 1);
  CHECK(loose[0].env_hashes == cells[0].env_hashes);
  CHECK(loose[1].env_hashes != cells[1].env_hashes);

  CHECK_THROWS_AS(run_sweep(cfg, "nonsense", grid, 1), ConfigError);
}

TEST_CASE("single-point sweep equals a plain batch") {
  const RunConfig cfg = parse_config(kSmall);
  const std::vector<std::string> grid{"0.3"};
  const auto cells = run_sweep(cfg, "rho", grid, 1);
  const auto plain = run_replications(cfg, 1);
  for (std::size_t r = 0; r < plain.size(); ++r)
    CHECK(csv_of(cells[0].results[r], "gibbs") == csv_of(plain[r], "gibbs"));
}

TEST_CASE("known-A with a point-mass prior has zero regret") {
  const std::string text = R"({
    "environment": {
      "n": 6, "sigma": 0.5,
      "graph": {"family": "erdos_renyi", "p": 0.4},
      "reward": {"kind": "additive_pairs"},
      "protocol": {"blocks": {"mu": {"dist": "constant", "value": 0.7},
                              "gamma": {"dist": "constant", "value": 0.7}}}
    },
    "horizon": 100, "budget": 2,
    "policies": [{"kind": "known_a_ts", "prior_mean": 0.7, "prior_var": 1e-14}],
    "replications": {"count": 2}
  })";
  for (const auto& r : run_replications(parse_config(text), 1))
    CHECK(r.policies[0].cumulative_regret() < 1e-9);
}

TEST_CASE("uniform random pair choice has the closed-form regret") {
  const ReplicationResult r = run_replication(parse_config(kPaired), 0);
  const auto& rounds = r.policies[0].rounds;
  double sum = 0.0, sq = 0.0;
  for (const auto& rec : rounds) {
    sum += rec.regret_inst;
    sq += rec.regret_inst * rec.regret_inst;
  }
  const double n = static_cast<double>(rounds.size());
  const double mean = sum / n, se = std::sqrt((sq / n - mean * mean) / n);
  // treating either node of the planted pair earns gamma_1 = 1: 2 of 8 nodes
  CHECK(std::abs(mean - 0.75) < 3 * se);
}

TEST_CASE("written outputs") {
  const RunConfig cfg = parse_config(kSmall);
  const auto results = run_replications(cfg, 1);
  const fs::path a = scratch("a"), b = scratch("b");
  const auto files = write_run(a, cfg, results);
  write_run(b, cfg, results);
  CHECK(fs::exists(a / "summary.json"));
  CHECK(fs::exists(a / "manifest.json"));
  CHECK(fs::exists(a / "reps" / "gibbs_rep000.csv"));
  CHECK(fs::exists(a / "graphs" / "gibbs_rep002_edges.txt"));
  CHECK(fs::exists(a / "graphs" / "true_rep000_edges.txt"));
  for (const auto& f : files) {
    CAPTURE(f);
    if (f == "timing.json") continue;
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const auto summary = nlohmann::json::parse(slurp(a / "summary.json"));
  CHECK(summary["regret_kind"] == "expected");
  CHECK(summary["policies"].size() == 3);
  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["files"].size() + 1 == files.size());  // the manifest does not list itself
  CHECK(manifest.contains("config_hash"));
  CHECK(manifest.contains("seeds"));

  // recovery-only output
  const fs::path rdir = scratch("recover");
  write_recovery(rdir, cfg, results);
  CHECK(fs::exists(rdir / "graphs" / "gibbs_rep000_marginals.csv"));
  CHECK(fs::exists(rdir / "manifest.json"));
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(rdir);
}
