#include "interfere/posterior.hpp"

#include <algorithm>
#include <cmath>

#include "interfere/detail/features.hpp"
#include "interfere/errors.hpp"
#include "interfere/linalg.hpp"

namespace interfere {

Prior Prior::make(Eigen::VectorXd mean, Eigen::MatrixXd cov, double noise_var, double rho) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size())
    throw ParameterError("prior covariance does not match the mean's dimension");
  if (!(noise_var > 0.0)) throw ParameterError("noise variance must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("edge prior rho must lie in (0, 1)");
  if (!cov.isApprox(cov.transpose(), 1e-12))
    throw ParameterError("prior covariance is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw ParameterError("prior covariance is not positive definite");
  Prior p;
  p.precision = symmetrize(llt.solve(Eigen::MatrixXd::Identity(cov.rows(), cov.cols())));
  p.mean = std::move(mean);
  p.cov = std::move(cov);
  p.noise_var = noise_var;
  p.rho = rho;
  return p;
}

Prior Prior::isotropic(std::size_t dim, double mean, double var, double noise_var, double rho) {
  if (!(var > 0.0)) throw ParameterError("prior variance must be positive");
  const auto d = static_cast<Eigen::Index>(dim);
  Prior p;
  p.mean = Eigen::VectorXd::Constant(d, mean);
  p.cov = Eigen::MatrixXd::Identity(d, d) * var;
  p.precision = Eigen::MatrixXd::Identity(d, d) / var;
  if (!(noise_var > 0.0)) throw ParameterError("noise variance must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("edge prior rho must lie in (0, 1)");
  p.noise_var = noise_var;
  p.rho = rho;
  return p;
}

double Prior::log_odds() const { return std::log(rho / (1.0 - rho)); }

void History::append(std::span<const std::uint8_t> z, std::span<const double> r) {
  if (z.size() != n_ || r.size() != n_)
    throw ParameterError("history: round length does not match n");
  z_.insert(z_.end(), z.begin(), z.end());
  r_.insert(r_.end(), r.begin(), r.end());
}

GaussianPosterior posterior_from_normal_equations(const Eigen::MatrixXd& gram,
                                                  const Eigen::VectorXd& rhs, const Prior& prior) {
  const Eigen::MatrixXd precision = gram / prior.noise_var + prior.precision;
  const JitteredCholesky chol(precision);
  GaussianPosterior post;
  post.cov = chol.inverse();
  post.mean = chol.solve(rhs / prior.noise_var + prior.precision * prior.mean);
  return post;
}

GaussianPosterior theta_posterior(const History& history, const Adjacency& a,
                                  const RewardSpec& spec, const Prior& prior) {
  const auto d = static_cast<Eigen::Index>(spec.dimension());
  if (prior.mean.size() != d) throw ParameterError("prior dimension does not match reward spec");
  if (a.size() != spec.n) throw ParameterError("graph size does not match n");
  if (history.empty()) return {prior.mean, prior.cov};

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  std::vector<Feature> row;
  for (std::size_t s = 0; s < history.rounds(); ++s) {
    const auto z = history.treatment(s);
    const auto r = history.rewards(s);
    for (std::size_t i = 0; i < spec.n; ++i) {
      node_features(spec, z, i, a.neighbors(i), row);
      for (const auto& f : row) {
        const auto p = static_cast<Eigen::Index>(f.index);
        rhs[p] += f.value * r[i];
        for (const auto& g : row) gram(p, static_cast<Eigen::Index>(g.index)) += f.value * g.value;
      }
    }
  }
  return posterior_from_normal_equations(gram, rhs, prior);
}

Eigen::VectorXd sample_theta(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size())
    throw ParameterError("sample_theta: covariance does not match mean");
  const JitteredCholesky chol(cov);
  return mean + chol.lower_times(standard_normal_vector(mean.size(), rng));
}

double edge_logit(std::size_t i, std::size_t j, const Adjacency& a, const Eigen::VectorXd& theta,
                  const History& history, const RewardSpec& spec, const Prior& prior) {
  if (i == j) throw ParameterError("edge_logit: i == j");
  if (i >= spec.n || j >= spec.n) throw ParameterError("edge_logit: node out of range");
  if (i > j) std::swap(i, j);

  double evidence = 0.0;
  for (const std::size_t node : {i, j}) {
    const std::size_t partner = node == i ? j : i;
    std::vector<std::size_t> without;
    for (std::size_t k : a.neighbors(node))
      if (k != partner) without.push_back(k);
    std::vector<std::size_t> with = without;
    with.insert(std::lower_bound(with.begin(), with.end(), partner), partner);
    for (std::size_t s = 0; s < history.rounds(); ++s) {
      const auto z = history.treatment(s);
      const double r = history.rewards(s)[node];
      const double eta0 = detail::row_dot(spec, theta, z, node, without);
      const double eta1 = detail::row_dot(spec, theta, z, node, with);
      evidence += (r - eta0) * (r - eta0) - (r - eta1) * (r - eta1);
    }
  }
  return prior.log_odds() + evidence / (2.0 * prior.noise_var);
}

}  // namespace interfere
