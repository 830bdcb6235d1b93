#include <doctest.h>

#include <bit>
#include <cmath>

#include "interfere/errors.hpp"
#include "interfere/optimizer.hpp"
#include "oracle.hpp"

using namespace interfere;

namespace {

Treatment from_mask(int n, unsigned mask) {
  Treatment z(n);
  for (int j = 0; j < n; ++j) z[j] = (mask >> j) & 1U;
  return z;
}

// Best value over all subsets of size <= budget, by brute force.
double brute_force(RewardKind kind, int n, int d_max, const Eigen::VectorXd& th, const Adjacency& a,
                   int budget) {
  const Eigen::MatrixXi A = oracle::dense(a);
  double best = -INFINITY;
  for (unsigned mask = 0; mask < (1U << n); ++mask)
    if (std::popcount(mask) <= budget) best = std::max(best, oracle::total(kind, n, d_max, th, A, from_mask(n, mask)));
  return best;
}

std::size_t ones(const Treatment& z) {
  std::size_t k = 0;
  for (auto v : z) k += v;
  return k;
}

OptimizerMode mode(OptimizerKind k) {
  OptimizerMode m;
  m.kind = k;
  return m;
}

}  // namespace

TEST_CASE("candidate counts") {
  CHECK(candidate_count(8, 3) == 1 + 8 + 28 + 56);
  CHECK(candidate_count(4, 10) == 16);
  CHECK(candidate_count(20, 0) == 1);
  CHECK(candidate_count(1000, 500) == SIZE_MAX);
}

TEST_CASE("top-b examples") {
  ModularScores s{0.0, Eigen::Vector3d(1.5, 2.0, 1.5)};
  CHECK(top_b(s, 1).z == Treatment{0, 1, 0});
  CHECK(top_b(s, 1).value == 2.0);
  CHECK(top_b(s, 2).z == Treatment{1, 1, 0});  // tie goes to the lower index

  ModularScores neg{3.0, Eigen::Vector3d(-1.0, -0.5, -2.0)};
  const Choice c = top_b(neg, 2);
  CHECK(c.z == Treatment{0, 0, 0});
  CHECK(c.value == 3.0);

  ModularScores mixed{0.0, Eigen::Vector4d(-1.0, 0.5, 0.0, 2.0)};
  CHECK(top_b(mixed, 3).z == Treatment{0, 1, 0, 1});
}

TEST_CASE("enumeration finds the brute-force optimum") {
  Rng rng(1);
  for (auto kind : oracle::all_kinds()) {
    CAPTURE(to_string(kind));
    const int dm = kind == RewardKind::count_based_shared || kind == RewardKind::count_based_per_node ? 3 : 0;
    for (int trial = 0; trial < 15; ++trial) {
      const int n = 3 + static_cast<int>(rng() % 5);
      const int budget = 1 + static_cast<int>(rng() % 3);
      const RewardSpec spec = make_spec(kind, n, dm);
      const Eigen::VectorXd th = oracle::random_theta(static_cast<int>(spec.dimension()), rng);
      const Adjacency a = oracle::random_graph(n, 0.5, rng);
      const Choice c = optimize_treatment(spec, th, a, budget, mode(OptimizerKind::exact_enumeration), rng);
      CHECK(ones(c.z) <= static_cast<std::size_t>(budget));
      CHECK(c.value == doctest::Approx(total_reward(spec, th, a, c.z)).epsilon(1e-12));
      CHECK(c.value == doctest::Approx(brute_force(kind, n, dm, th, a, budget)).epsilon(1e-12));
    }
  }
}

TEST_CASE("enumeration breaks ties toward smaller then lexicographically smaller sets") {
  const RewardSpec spec = make_spec(RewardKind::additive_pairs, 4);
  Rng rng(2);
  const Choice zero = optimize_treatment(spec, Eigen::VectorXd::Zero(10), Adjacency(4), 2,
                                         mode(OptimizerKind::exact_enumeration), rng);
  CHECK(zero.z == Treatment{0, 0, 0, 0});
  CHECK(zero.value == 0.0);

  Eigen::VectorXd th = Eigen::VectorXd::Zero(10);
  th.head(4) = Eigen::Vector4d(1.0, 2.0, 2.0, 2.0);
  const Choice c = optimize_treatment(spec, th, Adjacency(4), 1, mode(OptimizerKind::exact_enumeration), rng);
  CHECK(c.z == Treatment{0, 1, 0, 0});
}

TEST_CASE("exact and top-b agree on collapsible kinds") {
  Rng rng(3);
  for (auto kind : {RewardKind::linear_in_means_per_node, RewardKind::additive_pairs}) {
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 4 + static_cast<int>(rng() % 9);  // up to 12
      const int budget = 1 + static_cast<int>(rng() % 4);
      const RewardSpec spec = make_spec(kind, n);
      const Eigen::VectorXd th = oracle::random_theta(static_cast<int>(spec.dimension()), rng);
      const Adjacency a = oracle::random_graph(n, 0.3, rng);
      const Choice ex = optimize_treatment(spec, th, a, budget, mode(OptimizerKind::exact_enumeration), rng);
      const Choice tb = optimize_treatment(spec, th, a, budget, mode(OptimizerKind::top_b), rng);
      const Choice au = optimize_treatment(spec, th, a, budget, mode(OptimizerKind::automatic), rng);
      CHECK(ex.value == doctest::Approx(tb.value).epsilon(1e-10));
      CHECK(ex.z == tb.z);
      CHECK(au.z == tb.z);
      CHECK(tb.value >= total_reward(spec, th, a, Treatment(n, 0)) - 1e-12);
    }
  }
}

TEST_CASE("adding a constant to the objective does not move the argmax") {
  ModularScores s{0.0, Eigen::Vector4d(0.3, -0.2, 0.9, 0.1)};
  ModularScores shifted = s;
  shifted.c = 17.0;
  CHECK(top_b(s, 2).z == top_b(shifted, 2).z);
  CHECK(top_b(shifted, 2).value == doctest::Approx(top_b(s, 2).value + 17.0));
}

TEST_CASE("local search never beats enumeration") {
  Rng rng(4);
  const RewardSpec spec = make_spec(RewardKind::pairwise_nia, 8);
  int equal = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd th = oracle::random_theta(204, rng);
    const Adjacency a = oracle::random_graph(8, 0.3, rng);
    const Choice ex = optimize_treatment(spec, th, a, 3, mode(OptimizerKind::exact_enumeration), rng);
    const Choice ls = optimize_treatment(spec, th, a, 3, mode(OptimizerKind::swap_local_search), rng);
    CHECK(ones(ls.z) <= 3);
    CHECK(ex.value >= ls.value - 1e-12);
    CHECK(ls.value == doctest::Approx(total_reward(spec, th, a, ls.z)).epsilon(1e-12));
    equal += std::abs(ex.value - ls.value) < 1e-9;
  }
  MESSAGE("local search matched enumeration on " << equal << "/100 instances");
  CHECK(equal >= 80);
}

TEST_CASE("optimizer errors") {
  Rng rng(5);
  const RewardSpec nia = make_spec(RewardKind::pairwise_nia, 6);
  CHECK_THROWS_AS(optimize_treatment(nia, Eigen::VectorXd::Zero(nia.dimension()), Adjacency(6), 2,
                                     mode(OptimizerKind::top_b), rng),
                  ParameterError);
  OptimizerMode capped = mode(OptimizerKind::exact_enumeration);
  capped.max_candidates = 10;
  CHECK_THROWS_AS(optimize_treatment(nia, Eigen::VectorXd::Zero(nia.dimension()), Adjacency(6), 2, capped, rng),
                  ParameterError);
  CHECK_THROWS_AS(parse_optimizer_kind("ilp"), ParameterError);
}
