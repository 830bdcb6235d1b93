#include "interfere/exact.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>

#include "interfere/errors.hpp"
#include "interfere/graph.hpp"

namespace interfere {

namespace {

double log_evidence(const History& history, const RewardSpec& spec, const Prior& prior,
                    const Adjacency& a) {
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto rows = n * static_cast<Eigen::Index>(history.rounds());
  const auto d = static_cast<Eigen::Index>(spec.dimension());
  Eigen::MatrixXd h(rows, d);
  Eigen::VectorXd r(rows);
  for (std::size_t s = 0; s < history.rounds(); ++s) {
    const auto off = static_cast<Eigen::Index>(s) * n;
    h.middleRows(off, n) = design_matrix(spec, history.treatment(s), a);
    const auto rs = history.rewards(s);
    for (Eigen::Index i = 0; i < n; ++i) r[off + i] = rs[static_cast<std::size_t>(i)];
  }
  Eigen::MatrixXd cov = h * prior.cov * h.transpose();
  cov.diagonal().array() += prior.noise_var;
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("exact oracle: evidence covariance not PD");
  const Eigen::VectorXd resid = r - h * prior.mean;
  const Eigen::VectorXd w = llt.matrixL().solve(resid);
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (w.squaredNorm() + logdet +
                 static_cast<double>(rows) * std::log(2.0 * std::numbers::pi));
}

}  // namespace

GraphPosterior exact_graph_posterior(const History& history, const RewardSpec& spec,
                                     const Prior& prior) {
  const std::size_t n = spec.n;
  const std::size_t pairs = n * (n - 1) / 2;
  if (pairs > kMaxEnumeratedPairs)
    throw ParameterError("exact oracle supports at most " + std::to_string(kMaxEnumeratedPairs) +
                         " node pairs (n <= 6)");
  if (prior.dimension() != spec.dimension())
    throw ParameterError("prior dimension does not match reward spec");
  if (!history.empty() && history.nodes() != n)
    throw ParameterError("history node count does not match n");

  std::vector<Edge> pair_list;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pair_list.emplace_back(i, j);

  const std::size_t graphs = std::size_t{1} << pairs;
  std::vector<double> logp(graphs);
  const double lr = std::log(prior.rho), lnr = std::log1p(-prior.rho);
  double best = -INFINITY;
  for (std::size_t g = 0; g < graphs; ++g) {
    Adjacency a(n);
    std::size_t k = 0;
    for (std::size_t e = 0; e < pairs; ++e)
      if (g >> e & 1U) {
        a.set_edge(pair_list[e].first, pair_list[e].second, true);
        ++k;
      }
    double lp = static_cast<double>(k) * lr + static_cast<double>(pairs - k) * lnr;
    if (!history.empty()) lp += log_evidence(history, spec, prior, a);
    logp[g] = lp;
    best = std::max(best, lp);
  }

  GraphPosterior out;
  out.n = n;
  out.probability.resize(graphs);
  double total = 0.0;
  for (std::size_t g = 0; g < graphs; ++g) total += out.probability[g] = std::exp(logp[g] - best);
  const auto nn = static_cast<Eigen::Index>(n);
  out.marginals = Eigen::MatrixXd::Zero(nn, nn);
  for (std::size_t g = 0; g < graphs; ++g) {
    out.probability[g] /= total;
    for (std::size_t e = 0; e < pairs; ++e)
      if (g >> e & 1U) {
        const auto i = static_cast<Eigen::Index>(pair_list[e].first);
        const auto j = static_cast<Eigen::Index>(pair_list[e].second);
        out.marginals(i, j) += out.probability[g];
      }
  }
  out.marginals = (out.marginals + out.marginals.transpose()).eval();
  return out;
}

Eigen::MatrixXd exact_edge_marginals(const History& history, const RewardSpec& spec,
                                     const Prior& prior) {
  return exact_graph_posterior(history, spec, prior).marginals;
}

}  // namespace interfere
