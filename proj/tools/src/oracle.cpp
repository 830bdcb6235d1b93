#include <chrono>

#include "interfere/exact.hpp"
#include "interfere/gibbs.hpp"
#include "interfere/graph.hpp"
#include "interfere/protocol.hpp"
#include "interfere_cli/cli.hpp"

namespace interfere::cli {

OracleReport oracle_check(const OracleOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  Rng env_rng = make_stream(o.seed, Stream::environment);
  Rng noise = make_stream(o.seed, Stream::noise);
  Rng chain = make_stream(o.seed, Stream::inference);

  Environment env;
  env.spec = make_spec(RewardKind::count_based_shared, o.n, o.d_max);
  GraphGenSpec g;
  g.p = 0.5;
  g.seed = env_rng();
  env.graph = generate(g, o.n);
  env.theta = sample_params(env.spec, builtin_protocol("count_based"), env_rng);
  env.sigma = o.sigma;

  const Prior prior = Prior::isotropic(env.spec.dimension(), 0.0, o.prior_var, o.sigma * o.sigma, o.rho);
  History history(o.n);
  GibbsSampler sampler(env.spec, prior, GibbsOptions{1}, Adjacency(o.n));
  Treatment z(o.n);
  for (std::size_t s = 0; s < o.rounds; ++s) {
    for (auto& v : z) v = bernoulli(noise, 0.5) ? 1 : 0;
    const Eigen::VectorXd r = sample_rewards(env, z, noise);
    history.append(z, r);
    sampler.observe(z, r);
  }

  OracleReport rep;
  rep.exact = exact_edge_marginals(history, env.spec, prior);
  for (std::size_t k = 0; k < o.burn_in; ++k) sampler.sweep(chain);
  const auto n = static_cast<Eigen::Index>(o.n);
  rep.gibbs = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < o.sweeps; ++k) {
    sampler.sweep(chain);
    for (const auto& [i, j] : sampler.graph().edges()) {
      rep.gibbs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += 1.0;
      rep.gibbs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) += 1.0;
    }
  }
  if (o.sweeps) rep.gibbs /= static_cast<double>(o.sweeps);
  rep.max_gap = (rep.gibbs - rep.exact).cwiseAbs().maxCoeff();
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace interfere::cli
