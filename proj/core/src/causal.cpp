#include "interfere/causal.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "interfere/errors.hpp"
#include "interfere/sufficient_stats.hpp"

namespace interfere {

EstimandTriple true_estimands(const RewardSpec& spec, const Eigen::VectorXd& theta,
                              const Adjacency& a) {
  if (static_cast<std::size_t>(theta.size()) != spec.dimension())
    throw ParameterError("estimands: theta length does not match spec");
  if (a.size() != spec.n) throw ParameterError("estimands: graph size does not match n");
  const std::size_t n = spec.n;
  Treatment zero(n, 0), all(n, 1), single(n, 0);
  auto reward = [&](const Treatment& z, std::size_t i) {
    return node_reward(spec, theta, z, i, a.neighbors(i));
  };

  EstimandTriple out;
  std::size_t connected = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double base = reward(zero, i);
    single[i] = 1;
    out.tau_d += reward(single, i) - base;
    single[i] = 0;
    out.tau_tte += reward(all, i) - base;

    const auto nbrs = a.neighbors(i);
    if (nbrs.empty()) continue;
    double spill = 0.0;
    for (std::size_t j : nbrs) {
      single[j] = 1;
      spill += reward(single, i) - base;
      single[j] = 0;
    }
    out.tau_i1 += spill / static_cast<double>(nbrs.size());
    ++connected;
  }
  out.tau_d /= static_cast<double>(n);
  out.tau_tte /= static_cast<double>(n);
  out.tau_i1 = connected ? out.tau_i1 / static_cast<double>(connected) : 0.0;
  return out;
}

Adjacency graph_point_estimate(const Eigen::MatrixXd& marginals, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ParameterError("graph threshold must lie strictly inside (0, 1)");
  if (marginals.rows() != marginals.cols()) throw ParameterError("marginals must be square");
  const auto n = static_cast<std::size_t>(marginals.rows());
  Adjacency a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (marginals(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > threshold)
        a.set_edge(i, j, true);
  return a;
}

History randomized_phase(const Environment& env, std::size_t rounds, double treat_prob, Rng& rng) {
  if (!(treat_prob >= 0.0 && treat_prob < 1.0))
    throw ParameterError("treat_prob must lie in [0, 1)");
  const std::size_t n = env.spec.n;
  History h(n);
  Treatment z(n);
  for (std::size_t s = 0; s < rounds; ++s) {
    for (std::size_t i = 0; i < n; ++i) z[i] = bernoulli(rng, treat_prob) ? 1 : 0;
    h.append(z, sample_rewards(env, z, rng));
  }
  return h;
}

OlsFit estimate_ols(const History& history, const RewardSpec& spec, const Adjacency& a_hat,
                    double ridge_lambda) {
  if (history.empty()) throw ParameterError("estimate_ols: empty history");
  if (history.nodes() != spec.n) throw ParameterError("estimate_ols: history size does not match n");
  auto stats = make_stats(spec);
  for (std::size_t s = 0; s < history.rounds(); ++s)
    stats->append(history.treatment(s), history.rewards(s));
  const NormalEquations ne = normal_equations(*stats, a_hat);

  OlsFit fit;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ne.gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  fit.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (fit.condition > kRidgeConditionLimit) {
    fit.ridge = true;
    Eigen::MatrixXd reg = ne.gram;
    reg.diagonal().array() += ridge_lambda;
    fit.theta = reg.llt().solve(ne.rhs);
  } else {
    fit.theta = ne.gram.llt().solve(ne.rhs);
  }
  return fit;
}

EstimandTriple rmse(std::span<const EstimandTriple> estimates, std::span<const EstimandTriple> truths) {
  if (estimates.size() != truths.size()) throw ParameterError("rmse: length mismatch");
  if (estimates.empty()) throw ParameterError("rmse: empty input");
  EstimandTriple out;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    const double d = estimates[k].tau_d - truths[k].tau_d;
    const double i = estimates[k].tau_i1 - truths[k].tau_i1;
    const double t = estimates[k].tau_tte - truths[k].tau_tte;
    out.tau_d += d * d;
    out.tau_i1 += i * i;
    out.tau_tte += t * t;
  }
  const double m = static_cast<double>(estimates.size());
  return {std::sqrt(out.tau_d / m), std::sqrt(out.tau_i1 / m), std::sqrt(out.tau_tte / m)};
}

}  // namespace interfere
