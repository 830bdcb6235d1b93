#include "interfere/etc.hpp"

#include <cmath>

#include "interfere/errors.hpp"

namespace interfere {

std::string_view to_string(ThresholdRule rule) {
  return rule == ThresholdRule::theorem ? "theorem" : "adaptive";
}

ThresholdRule parse_threshold_rule(std::string_view name) {
  if (name == "theorem") return ThresholdRule::theorem;
  if (name == "adaptive") return ThresholdRule::adaptive;
  throw ParameterError("unknown threshold rule '" + std::string(name) + "'");
}

std::size_t etc_m(double sigma, double delta, std::size_t n, std::size_t horizon) {
  if (!(sigma >= 0.0) || !(delta > 0.0) || n == 0 || horizon == 0)
    throw ParameterError("etc_m: needs sigma >= 0, delta > 0, n >= 1, T >= 1");
  const double nn = static_cast<double>(n);
  const double m = std::ceil(8.0 * sigma * sigma * std::log(nn * nn * static_cast<double>(horizon)) /
                             (delta * delta));
  return m < 1.0 ? 1 : static_cast<std::size_t>(m);
}

IsolationMeans::IsolationMeans(std::size_t n)
    : sum(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))),
      count(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))) {}

void IsolationMeans::add(std::size_t treated, std::span<const double> r) {
  const auto j = static_cast<Eigen::Index>(treated);
  for (Eigen::Index i = 0; i < sum.rows(); ++i) {
    sum(i, j) += r[static_cast<std::size_t>(i)];
    count(i, j) += 1.0;
  }
}

Eigen::MatrixXd IsolationMeans::means() const {
  return (count.array() > 0.0).select(sum.array() / count.array().max(1.0), 0.0).matrix();
}

Adjacency etc_threshold(const Eigen::MatrixXd& means, ThresholdRule rule, double delta,
                        double sigma, std::size_t m) {
  const auto n = static_cast<std::size_t>(means.rows());
  if (means.cols() != means.rows()) throw ParameterError("etc_threshold: means must be square");
  if (m == 0) throw ParameterError("etc_threshold: m must be >= 1");
  Adjacency a(n);
  const double tau = 3.0 * sigma * std::sqrt(2.0 / static_cast<double>(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      bool edge;
      if (rule == ThresholdRule::theorem) {
        edge = means(ii, jj) > delta / 2.0 || means(jj, ii) > delta / 2.0;
      } else {
        const double d = std::max(means(ii, jj) - means(ii, ii), means(jj, ii) - means(jj, jj));
        edge = d > tau;
      }
      if (edge) a.set_edge(i, j, true);
    }
  return a;
}

EtcPhase1 etc_phase1(const Environment& env, std::size_t m, ThresholdRule rule, double delta,
                     Rng& noise) {
  if (m == 0) throw ParameterError("etc_phase1: m must be >= 1");
  const std::size_t n = env.spec.n;
  EtcPhase1 out{Adjacency(n), {}, History(n)};
  IsolationMeans acc(n);
  Treatment z(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    z.assign(n, 0);
    z[j] = 1;
    for (std::size_t k = 0; k < m; ++k) {
      const Eigen::VectorXd r = sample_rewards(env, z, noise);
      const std::span<const double> rs(r.data(), n);
      acc.add(j, rs);
      out.history.append(z, rs);
    }
  }
  out.means = acc.means();
  out.a_hat = etc_threshold(out.means, rule, delta, env.sigma, m);
  return out;
}

}  // namespace interfere
