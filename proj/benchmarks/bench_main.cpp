#include <benchmark/benchmark.h>

#include "interfere/gibbs.hpp"
#include "interfere/optimizer.hpp"
#include "interfere/policy.hpp"
#include "interfere/protocol.hpp"
#include "interfere/runner.hpp"

using namespace interfere;

namespace {

struct Fixture {
  Environment env;
  Prior prior;
  GibbsSampler sampler;
};

Fixture make(RewardKind kind, std::size_t n, std::size_t rounds) {
  Rng rng(1);
  Environment env;
  env.spec = make_spec(kind, n, 4);
  GraphGenSpec g;
  g.p = 0.2;
  g.seed = 2;
  env.graph = generate(g, n);
  env.theta = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(env.spec.dimension()), 0.5);
  env.sigma = 1.0;
  const Prior prior = Prior::isotropic(env.spec.dimension(), 0.0, 10.0, 1.0, 0.2);
  GibbsSampler sampler(env.spec, prior, GibbsOptions{1}, Adjacency(n));
  const std::size_t budget = std::max<std::size_t>(1, n / 5);
  for (std::size_t t = 0; t < rounds; ++t) {
    const Treatment z = random_subset(n, budget, rng);
    sampler.observe(z, sample_rewards(env, z, rng));
  }
  return {env, prior, std::move(sampler)};
}

void BM_EdgePass(benchmark::State& state, RewardKind kind) {
  Fixture f = make(kind, static_cast<std::size_t>(state.range(0)), 500);
  Rng rng(3);
  for (auto _ : state) f.sampler.edge_pass(rng);
  state.SetItemsProcessed(state.iterations() * state.range(0) * (state.range(0) - 1) / 2);
}

void BM_DrawTheta(benchmark::State& state, RewardKind kind) {
  Fixture f = make(kind, static_cast<std::size_t>(state.range(0)), 500);
  Rng rng(3);
  for (auto _ : state) f.sampler.draw_theta(rng);
}

void BM_Optimizer(benchmark::State& state, RewardKind kind, OptimizerKind mode) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Fixture f = make(kind, n, 0);
  OptimizerMode m;
  m.kind = mode;
  Rng rng(4);
  for (auto _ : state)
    benchmark::DoNotOptimize(optimize_treatment(f.env.spec, f.env.theta, f.env.graph, 3, m, rng));
}

}  // namespace

BENCHMARK_CAPTURE(BM_EdgePass, count_based, RewardKind::count_based_shared)->Arg(8)->Arg(20)->Arg(50);
BENCHMARK_CAPTURE(BM_EdgePass, linear_in_means, RewardKind::linear_in_means_per_node)->Arg(20)->Arg(100)->Arg(250);
BENCHMARK_CAPTURE(BM_EdgePass, pairwise_nia, RewardKind::pairwise_nia)->Arg(8);
BENCHMARK_CAPTURE(BM_DrawTheta, count_based, RewardKind::count_based_shared)->Arg(20);
BENCHMARK_CAPTURE(BM_DrawTheta, linear_in_means, RewardKind::linear_in_means_per_node)->Arg(20)->Arg(250);
BENCHMARK_CAPTURE(BM_DrawTheta, pairwise_nia, RewardKind::pairwise_nia)->Arg(8);
BENCHMARK_CAPTURE(BM_Optimizer, enumeration, RewardKind::pairwise_nia, OptimizerKind::exact_enumeration)->Arg(8);
BENCHMARK_CAPTURE(BM_Optimizer, local_search, RewardKind::pairwise_nia, OptimizerKind::swap_local_search)->Arg(8);
BENCHMARK_CAPTURE(BM_Optimizer, top_b, RewardKind::linear_in_means_per_node, OptimizerKind::top_b)->Arg(250);
BENCHMARK_MAIN();
