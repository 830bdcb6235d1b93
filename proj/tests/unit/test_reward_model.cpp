#include <doctest.h>

#include <cmath>

#include "interfere/errors.hpp"
#include "interfere/reward_model.hpp"
#include "oracle.hpp"

using namespace interfere;

namespace {

int d_max_for(RewardKind k) {
  return (k == RewardKind::count_based_shared || k == RewardKind::count_based_per_node) ? 3 : 0;
}

std::size_t choose2(std::size_t n) { return n * (n - 1) / 2; }

}  // namespace

TEST_CASE("dimension table") {
  for (std::size_t n : {2u, 8u, 20u}) {
    const std::size_t p = choose2(n), d = 4;
    CHECK(make_spec(RewardKind::linear_in_means_per_node, n).dimension() == 2 * n);
    CHECK(make_spec(RewardKind::count_based_shared, n, d).dimension() == 1 + d);
    CHECK(make_spec(RewardKind::count_based_per_node, n, d).dimension() == n * (1 + d));
    CHECK(make_spec(RewardKind::pairwise_nia, n).dimension() == n + p + n * choose2(n - 1));
    CHECK(make_spec(RewardKind::additive_pairs, n).dimension() == n + p);
    CHECK(make_spec(RewardKind::saturation_spec_a, n).dimension() == n + p);
    CHECK(make_spec(RewardKind::interaction_spec_b, n).dimension() == n + p + n);
    CHECK(make_spec(RewardKind::paired_indicator, n).dimension() == 2);
  }
  CHECK(make_spec(RewardKind::pairwise_nia, 8).dimension() == 204);
  CHECK(make_spec(RewardKind::additive_pairs, 8).dimension() == 36);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(make_spec(RewardKind::additive_pairs, 1), ParameterError);
  CHECK_THROWS_AS(make_spec(RewardKind::count_based_shared, 5, 0), ParameterError);
  CHECK_THROWS_AS(parse_reward_kind("quadratic"), ParameterError);
  for (auto k : oracle::all_kinds()) CHECK(parse_reward_kind(to_string(k)) == k);
}

TEST_CASE("pair index matches a lexicographic scan") {
  for (int m : {2, 5, 9})
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        if (a != b) CHECK(static_cast<int>(pair_index(m, a, b)) == oracle::pair_slot(m, a, b));
}

TEST_CASE("design rows agree with direct formula evaluation") {
  Rng rng(11);
  for (auto kind : oracle::all_kinds()) {
    CAPTURE(to_string(kind));
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 2 + static_cast<int>(rng() % 6);
      const RewardSpec spec = make_spec(kind, n, d_max_for(kind));
      const int D = static_cast<int>(spec.dimension());
      const Adjacency a = oracle::random_graph(n, 0.5, rng);
      const auto z = oracle::random_z(n, 0.5, rng);
      const Eigen::MatrixXi A = oracle::dense(a);
      const Eigen::MatrixXd H = design_matrix(spec, z, a);
      const Eigen::MatrixXd ref = oracle::probe_design(kind, n, d_max_for(kind), D, A, z);
      CHECK((H - ref).cwiseAbs().maxCoeff() == 0.0);
      for (int i = 0; i < n; ++i) CHECK((design_row(spec, z, a, i) - H.row(i).transpose()).norm() == 0.0);

      const Eigen::VectorXd th = oracle::random_theta(D, rng);
      const Eigen::VectorXd r = expected_rewards(spec, th, a, z);
      for (int i = 0; i < n; ++i)
        CHECK(r[i] == doctest::Approx(oracle::reward(kind, n, d_max_for(kind), th, A, z, i)).epsilon(1e-12));
      CHECK(total_reward(spec, th, a, z) == doctest::Approx(r.sum()).epsilon(1e-12));
    }
  }
}

TEST_CASE("design row examples") {
  const std::vector<Edge> two{{0, 1}, {0, 2}};
  const Adjacency a = Adjacency::from_edges(3, two);
  const Treatment z{1, 1, 0};
  const RewardSpec lim = make_spec(RewardKind::linear_in_means_per_node, 3);
  const Eigen::VectorXd row = design_row(lim, z, a, 0);
  CHECK(row[0] == 1.0);
  CHECK(row[3] == 0.5);
  CHECK(row.sum() == 1.5);

  std::vector<Edge> star;
  for (std::size_t j = 1; j <= 6; ++j) star.push_back({0, j});
  const RewardSpec cb = make_spec(RewardKind::count_based_shared, 7, 4);
  const Treatment zs{0, 1, 1, 1, 1, 1, 1};
  const Eigen::VectorXd crow = design_row(cb, zs, Adjacency::from_edges(7, star), 0);
  CHECK(crow[4] == 1.0);
  CHECK(crow.sum() == 1.0);

  const RewardSpec two_nodes = make_spec(RewardKind::linear_in_means_per_node, 2);
  Eigen::MatrixXd want = Eigen::MatrixXd::Zero(2, 4);
  want(0, 0) = 1.0;
  CHECK(design_matrix(two_nodes, Treatment{1, 0}, Adjacency(2)) == want);

  CHECK_THROWS_AS(design_row(lim, z, a, 3), ParameterError);
}

TEST_CASE("null treatment has no active features") {
  Rng rng(5);
  for (auto kind : oracle::all_kinds()) {
    const RewardSpec spec = make_spec(kind, 6, d_max_for(kind));
    const Adjacency a = oracle::random_graph(6, 0.6, rng);
    CHECK(design_matrix(spec, Treatment(6, 0), a).cwiseAbs().sum() == 0.0);
  }
}

TEST_CASE("expected reward examples") {
  const std::vector<Edge> e{{0, 1}, {0, 2}};
  const Adjacency a = Adjacency::from_edges(3, e);
  Eigen::VectorXd cb(5);
  cb << 1, 1, 2, 3, 4;
  const RewardSpec cspec = make_spec(RewardKind::count_based_shared, 3, 4);
  CHECK(expected_rewards(cspec, cb, a, Treatment{0, 1, 1})[0] == 2.0);

  const RewardSpec lspec = make_spec(RewardKind::linear_in_means_per_node, 3);
  Eigen::VectorXd th = Eigen::VectorXd::Zero(6);
  th[0] = 2.0;
  th[3] = 1.0;
  CHECK(expected_rewards(lspec, th, a, Treatment{1, 1, 1})[0] == 3.0);
  CHECK(expected_rewards(lspec, Eigen::VectorXd::Zero(6), a, Treatment{1, 1, 1}).norm() == 0.0);
  CHECK_THROWS_AS(expected_rewards(lspec, Eigen::VectorXd::Zero(5), a, Treatment{1, 1, 1}),
                  ParameterError);
}

TEST_CASE("linearity in theta") {
  Rng rng(21);
  for (auto kind : oracle::all_kinds()) {
    const RewardSpec spec = make_spec(kind, 6, d_max_for(kind));
    const int D = static_cast<int>(spec.dimension());
    for (int trial = 0; trial < 20; ++trial) {
      const Adjacency a = oracle::random_graph(6, 0.5, rng);
      const auto z = oracle::random_z(6, 0.5, rng);
      const Eigen::VectorXd t1 = oracle::random_theta(D, rng), t2 = oracle::random_theta(D, rng);
      const Eigen::VectorXd lhs = expected_rewards(spec, 2.5 * t1 - 0.7 * t2, a, z);
      const Eigen::VectorXd rhs =
          2.5 * expected_rewards(spec, t1, a, z) - 0.7 * expected_rewards(spec, t2, a, z);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("treatment and edge locality") {
  Rng rng(3);
  for (auto kind : oracle::all_kinds()) {
    CAPTURE(to_string(kind));
    const int n = 6;
    const RewardSpec spec = make_spec(kind, n, d_max_for(kind));
    for (int trial = 0; trial < 30; ++trial) {
      Adjacency a = oracle::random_graph(n, 0.5, rng);
      auto z = oracle::random_z(n, 0.5, rng);
      const Eigen::MatrixXd H = design_matrix(spec, z, a);
      // toggling a non-neighbor's treatment leaves row i alone
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j || a.has_edge(i, j)) continue;
          auto z2 = z;
          z2[j] ^= 1;
          CHECK((design_row(spec, z2, a, i) - H.row(i).transpose()).norm() == 0.0);
        }
      // toggling A_ij leaves every other row alone
      const std::size_t i = rng() % n, j = (i + 1 + rng() % (n - 1)) % n;
      a.set_edge(i, j, !a.has_edge(i, j));
      const Eigen::MatrixXd H2 = design_matrix(spec, z, a);
      for (int l = 0; l < n; ++l)
        if (l != static_cast<int>(i) && l != static_cast<int>(j)) CHECK((H2.row(l) - H.row(l)).norm() == 0.0);
    }
  }
}

TEST_CASE("collapsible kinds") {
  CHECK(is_collapsible(RewardKind::linear_in_means_per_node));
  CHECK(is_collapsible(RewardKind::additive_pairs));
  for (auto k : {RewardKind::pairwise_nia, RewardKind::saturation_spec_a, RewardKind::interaction_spec_b,
                 RewardKind::count_based_shared, RewardKind::count_based_per_node}) {
    CHECK_FALSE(is_collapsible(k));
    const RewardSpec s = make_spec(k, 4, d_max_for(k));
    CHECK_FALSE(modular_scores(s, Eigen::VectorXd::Ones(s.dimension()), Adjacency(4)).has_value());
  }
}

TEST_CASE("modular scores on a path") {
  const std::vector<Edge> path{{0, 1}, {1, 2}};
  const Adjacency a = Adjacency::from_edges(3, path);
  const RewardSpec spec = make_spec(RewardKind::additive_pairs, 3);
  Eigen::VectorXd th(6);
  th << 1, 1, 1, 0.5, 0.5, 0.5;
  const auto ms = modular_scores(spec, th, a);
  REQUIRE(ms);
  CHECK(ms->c == 0.0);
  CHECK(ms->s[0] == doctest::Approx(1.5));
  CHECK(ms->s[1] == doctest::Approx(2.0));
  CHECK(ms->s[2] == doctest::Approx(1.5));
  // tau_j + lambda deg(j) with lambda = 0.5
  for (int j = 0; j < 3; ++j) CHECK(ms->s[j] == doctest::Approx(1.0 + 0.5 * a.degree(j)));

  const auto zero = modular_scores(spec, Eigen::VectorXd::Zero(6), a);
  REQUIRE(zero);
  CHECK(zero->c == 0.0);
  CHECK(zero->s.norm() == 0.0);
}

TEST_CASE("modular collapse is exact over every treatment at n = 6") {
  Rng rng(8);
  for (auto kind : {RewardKind::linear_in_means_per_node, RewardKind::additive_pairs}) {
    const int n = 6;
    const RewardSpec spec = make_spec(kind, n);
    const int D = static_cast<int>(spec.dimension());
    for (int trial = 0; trial < 10; ++trial) {
      const Adjacency a = oracle::random_graph(n, 0.5, rng);
      const Eigen::VectorXd th = oracle::random_theta(D, rng);
      const auto ms = modular_scores(spec, th, a);
      REQUIRE(ms);
      const Eigen::MatrixXi A = oracle::dense(a);
      for (int mask = 0; mask < (1 << n); ++mask) {
        Treatment z(n);
        double lin = ms->c;
        for (int j = 0; j < n; ++j) {
          z[j] = (mask >> j) & 1;
          lin += z[j] * ms->s[j];
        }
        CHECK(lin == doctest::Approx(oracle::total(kind, n, 0, th, A, z)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("sample_rewards noise") {
  Environment env;
  env.spec = make_spec(RewardKind::linear_in_means_per_node, 3);
  env.theta = Eigen::VectorXd::LinSpaced(6, 0.5, 1.5);
  const std::vector<Edge> e{{0, 1}, {1, 2}};
  env.graph = Adjacency::from_edges(3, e);
  env.sigma = 0.7;
  const Treatment z{1, 0, 1};
  const Eigen::VectorXd mean = expected_rewards(env.spec, env.theta, env.graph, z);

  const int draws = 100000;
  Rng rng(99);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(3);
  for (int s = 0; s < draws; ++s) acc += sample_rewards(env, z, rng);
  acc /= draws;
  for (int i = 0; i < 3; ++i) CHECK(std::abs(acc[i] - mean[i]) < 4 * env.sigma / std::sqrt(draws));

  Rng r1(4), r2(4);
  CHECK(sample_rewards(env, z, r1) == sample_rewards(env, z, r2));

  env.sigma = 1e-300;
  Rng r3(1);
  CHECK((sample_rewards(env, z, r3) - mean).norm() < 1e-12);
}

TEST_CASE("environment hash tracks content") {
  Environment env;
  env.spec = make_spec(RewardKind::additive_pairs, 3);
  env.theta = Eigen::VectorXd::Ones(6);
  env.graph = Adjacency(3);
  const auto h = environment_hash(env);
  CHECK(environment_hash(env) == h);
  env.graph.set_edge(0, 1, true);
  CHECK(environment_hash(env) != h);
}
