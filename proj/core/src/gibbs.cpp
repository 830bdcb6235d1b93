#include "interfere/gibbs.hpp"

#include <algorithm>
#include <cmath>

#include "interfere/errors.hpp"

namespace interfere {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

bool block_diagonal(const Eigen::MatrixXd& m, const std::vector<std::size_t>& block_of_index) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (m(r, c) != 0.0 && block_of_index[static_cast<std::size_t>(r)] !=
                                block_of_index[static_cast<std::size_t>(c)])
        return false;
  return true;
}

}  // namespace

GibbsSampler::GibbsSampler(const RewardSpec& spec, Prior prior, GibbsOptions options,
                           Adjacency initial)
    : spec_(spec),
      prior_(std::move(prior)),
      options_(options),
      graph_(std::move(initial)),
      stats_(make_stats(spec)) {
  const std::size_t d = spec.dimension();
  if (prior_.dimension() != d)
    throw ParameterError("prior dimension " + std::to_string(prior_.dimension()) +
                         " does not match reward spec dimension " + std::to_string(d));
  if (graph_.size() != spec.n) throw ParameterError("initial graph size does not match n");

  ParameterLayout layout = parameter_layout(spec);
  if (layout.blocks.size() > 1 && !block_diagonal(prior_.precision, layout.block_of_index)) {
    layout.blocks.assign(1, {});
    for (std::size_t k = 0; k < d; ++k) layout.blocks[0].push_back(k);
    layout.block_of_node.assign(spec.n, 0);
  }
  block_of_node_ = layout.block_of_node;
  nodes_of_block_.assign(layout.blocks.size(), {});
  for (std::size_t v = 0; v < spec.n; ++v) nodes_of_block_[block_of_node_[v]].push_back(v);

  local_.assign(d, 0);
  const Eigen::VectorXd shift = prior_.precision * prior_.mean;
  for (auto& idx : layout.blocks) {
    Block b;
    b.index = std::move(idx);
    const auto m = static_cast<Eigen::Index>(b.index.size());
    b.prior_precision.resize(m, m);
    b.prior_shift.resize(m);
    for (Eigen::Index p = 0; p < m; ++p) {
      const auto gp = static_cast<Eigen::Index>(b.index[static_cast<std::size_t>(p)]);
      local_[static_cast<std::size_t>(gp)] = static_cast<std::size_t>(p);
      b.prior_shift[p] = shift[gp];
      for (Eigen::Index q = 0; q < m; ++q)
        b.prior_precision(p, q) =
            prior_.precision(gp, static_cast<Eigen::Index>(b.index[static_cast<std::size_t>(q)]));
    }
    blocks_.push_back(std::move(b));
  }

  theta_ = prior_.mean;
  for (std::size_t i = 0; i < spec.n; ++i)
    for (std::size_t j = i + 1; j < spec.n; ++j) pairs_.emplace_back(i, j);
}

void GibbsSampler::observe(std::span<const std::uint8_t> z, std::span<const double> r) {
  stats_->append(z, r);
}

void GibbsSampler::touch(std::size_t node) { ++blocks_[block_of_node_[node]].epoch; }

void GibbsSampler::flip(std::size_t i, std::size_t j, bool value) {
  if (graph_.set_edge(i, j, value)) {
    touch(i);
    if (block_of_node_[j] != block_of_node_[i]) touch(j);
  }
}

void GibbsSampler::set_graph(const Adjacency& a) {
  if (a.size() != spec_.n) throw ParameterError("set_graph: size does not match n");
  graph_ = a;
  for (auto& b : blocks_) ++b.epoch;
}

void GibbsSampler::set_theta(const Eigen::VectorXd& theta) {
  if (theta.size() != theta_.size()) throw ParameterError("set_theta: wrong length");
  theta_ = theta;
}

void GibbsSampler::factor(Block& b, std::size_t id) {
  if (b.factored_version == stats_->version() && b.factored_epoch == b.epoch) return;
  const auto m = static_cast<Eigen::Index>(b.index.size());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (std::size_t node : nodes_of_block_[id]) {
    const NodeContribution& c = stats_->node_contribution(node, graph_.neighbors(node));
    for (std::size_t p = 0; p < c.index.size(); ++p) {
      const auto lp = static_cast<Eigen::Index>(local_[c.index[p]]);
      rhs[lp] += c.rhs[static_cast<Eigen::Index>(p)];
      for (std::size_t q = 0; q < c.index.size(); ++q)
        gram(lp, static_cast<Eigen::Index>(local_[c.index[q]])) +=
            c.gram(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
    }
  }
  const double inv_s2 = 1.0 / prior_.noise_var;
  b.chol = JitteredCholesky(gram * inv_s2 + b.prior_precision);
  b.mean = b.chol.solve(rhs * inv_s2 + b.prior_shift);
  b.factored_version = stats_->version();
  b.factored_epoch = b.epoch;
}

void GibbsSampler::draw_theta(Rng& rng) {
  for (std::size_t id = 0; id < blocks_.size(); ++id) {
    Block& b = blocks_[id];
    factor(b, id);
    const auto m = static_cast<Eigen::Index>(b.index.size());
    const Eigen::VectorXd draw = b.mean + b.chol.upper_solve(standard_normal_vector(m, rng));
    for (Eigen::Index p = 0; p < m; ++p)
      theta_[static_cast<Eigen::Index>(b.index[static_cast<std::size_t>(p)])] = draw[p];
  }
}

double GibbsSampler::edge_logit(std::size_t i, std::size_t j) {
  if (i == j) throw ParameterError("edge_logit: i == j");
  return prior_.log_odds() + stats_->edge_evidence(i, j, graph_, theta_) / (2.0 * prior_.noise_var);
}

void GibbsSampler::edge_pass(Rng& rng, Eigen::MatrixXd* probs) {
  if (options_.order == EdgeOrder::random_scan) std::ranges::shuffle(pairs_, rng);
  for (const auto& [i, j] : pairs_) {
    const double p = sigmoid(edge_logit(i, j));
    if (probs) {
      (*probs)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += p;
      (*probs)(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) += p;
    }
    flip(i, j, uniform01(rng) < p);
  }
}

void GibbsSampler::sweep(Rng& rng) {
  draw_theta(rng);
  if (options_.update_edges) edge_pass(rng);
}

void GibbsSampler::run(Rng& rng) {
  for (std::size_t k = 0; k < options_.sweeps; ++k) sweep(rng);
}

GaussianPosterior GibbsSampler::conditional_posterior() {
  const auto d = static_cast<Eigen::Index>(spec_.dimension());
  GaussianPosterior post{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d)};
  for (std::size_t id = 0; id < blocks_.size(); ++id) {
    Block& b = blocks_[id];
    factor(b, id);
    const Eigen::MatrixXd cov = b.chol.inverse();
    for (std::size_t p = 0; p < b.index.size(); ++p) {
      const auto gp = static_cast<Eigen::Index>(b.index[p]);
      post.mean[gp] = b.mean[static_cast<Eigen::Index>(p)];
      for (std::size_t q = 0; q < b.index.size(); ++q)
        post.cov(gp, static_cast<Eigen::Index>(b.index[q])) =
            cov(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
    }
  }
  return post;
}

Eigen::VectorXd GibbsSampler::conditional_mean() {
  Eigen::VectorXd mean(static_cast<Eigen::Index>(spec_.dimension()));
  for (std::size_t id = 0; id < blocks_.size(); ++id) {
    Block& b = blocks_[id];
    factor(b, id);
    for (std::size_t p = 0; p < b.index.size(); ++p)
      mean[static_cast<Eigen::Index>(b.index[p])] = b.mean[static_cast<Eigen::Index>(p)];
  }
  return mean;
}

Eigen::MatrixXd GibbsSampler::edge_marginals(std::size_t sweeps, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(spec_.n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  if (!options_.update_edges || sweeps == 0) {
    for (const auto& [i, j] : graph_.edges()) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
    }
    return m;
  }
  for (std::size_t s = 0; s < sweeps; ++s) {
    draw_theta(rng);
    edge_pass(rng, &m);
  }
  return m / static_cast<double>(sweeps);
}

Adjacency GibbsSampler::draw_prior_graph(std::size_t n, double rho, Rng& rng) {
  Adjacency a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (uniform01(rng) < rho) a.set_edge(i, j, true);
  return a;
}

}  // namespace interfere
