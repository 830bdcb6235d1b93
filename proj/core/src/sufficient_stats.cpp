#include "interfere/sufficient_stats.hpp"

#include <algorithm>
#include <ranges>

#include "interfere/detail/features.hpp"
#include "interfere/errors.hpp"

namespace interfere {

namespace {

void neighbor_variants(std::span<const std::size_t> nbrs, std::size_t partner,
                       std::vector<std::size_t>& without, std::vector<std::size_t>& with) {
  without.clear();
  for (std::size_t k : nbrs)
    if (k != partner) without.push_back(k);
  with = without;
  with.insert(std::lower_bound(with.begin(), with.end(), partner), partner);
}

bool same(std::span<const std::size_t> a, const std::vector<std::size_t>& b) {
  return std::ranges::equal(a, b);
}

}  // namespace

std::vector<std::size_t> reachable_indices(const RewardSpec& spec, std::size_t node,
                                           std::span<const std::size_t> nbrs) {
  using detail::choose2;
  const std::size_t n = spec.n;
  const std::size_t deg = nbrs.size();
  std::vector<std::size_t> out;
  auto pairs = [&] {
    for (std::size_t k : nbrs) out.push_back(n + pair_index(n, node, k));
  };
  switch (spec.kind) {
    case RewardKind::linear_in_means_per_node:
      out.push_back(node);
      if (deg) out.push_back(n + node);
      break;
    case RewardKind::count_based_shared:
      out.push_back(0);
      for (std::size_t k = 1; k <= std::min(deg, spec.d_max); ++k) out.push_back(k);
      break;
    case RewardKind::count_based_per_node:
      out.push_back(node);
      for (std::size_t k = 1; k <= std::min(deg, spec.d_max); ++k)
        out.push_back(n + node * spec.d_max + k - 1);
      break;
    case RewardKind::pairwise_nia: {
      out.push_back(node);
      pairs();
      const std::size_t base = n + choose2(n) + node * choose2(n - 1);
      for (std::size_t a = 0; a < deg; ++a)
        for (std::size_t b = a + 1; b < deg; ++b)
          out.push_back(base + pair_index(n - 1, nbrs[a] - (nbrs[a] > node),
                                          nbrs[b] - (nbrs[b] > node)));
      break;
    }
    case RewardKind::additive_pairs:
    case RewardKind::saturation_spec_a:
      out.push_back(node);
      pairs();
      break;
    case RewardKind::interaction_spec_b:
      out.push_back(node);
      pairs();
      if (deg) out.push_back(n + choose2(n) + node);
      break;
    case RewardKind::paired_indicator:
      out.push_back(0);
      if (deg) out.push_back(1);
      break;
  }
  std::ranges::sort(out);
  return out;
}

NormalEquations normal_equations(SufficientStats& stats, const Adjacency& a) {
  const auto d = static_cast<Eigen::Index>(stats.spec().dimension());
  NormalEquations ne{Eigen::MatrixXd::Zero(d, d), Eigen::VectorXd::Zero(d)};
  for (std::size_t node = 0; node < stats.spec().n; ++node) {
    const NodeContribution& c = stats.node_contribution(node, a.neighbors(node));
    for (std::size_t p = 0; p < c.index.size(); ++p) {
      const auto gp = static_cast<Eigen::Index>(c.index[p]);
      ne.rhs[gp] += c.rhs[static_cast<Eigen::Index>(p)];
      for (std::size_t q = 0; q < c.index.size(); ++q)
        ne.gram(gp, static_cast<Eigen::Index>(c.index[q])) +=
            c.gram(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
    }
  }
  return ne;
}

// ---------------------------------------------------------------------------

PatternStats::PatternStats(RewardSpec spec)
    : SufficientStats(spec), treated_in_(spec.n), cache_(spec.n), slot_(spec.dimension(), -1) {}

void PatternStats::append(std::span<const std::uint8_t> z, std::span<const double> r) {
  const std::size_t n = spec_.n;
  if (z.size() != n || r.size() != n) throw ParameterError("stats: round length does not match n");
  std::string key(reinterpret_cast<const char*>(z.data()), n);
  auto [it, fresh] = lookup_.try_emplace(std::move(key), count_.size());
  const std::size_t p = it->second;
  if (fresh) {
    z_.insert(z_.end(), z.begin(), z.end());
    count_.push_back(0.0);
    rsum_.resize(rsum_.size() + n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      if (z[k]) treated_in_[k].push_back(p);
  }
  count_[p] += 1.0;
  for (std::size_t k = 0; k < n; ++k) rsum_[p * n + k] += r[k];
  round_pattern_.push_back(p);
  r_log_.insert(r_log_.end(), r.begin(), r.end());
  ++rounds_;
}

const NodeContribution& PatternStats::node_contribution(std::size_t node,
                                                        std::span<const std::size_t> nbrs) {
  Cache& c = cache_[node];
  const std::size_t n = spec_.n;
  const bool reuse = c.version <= rounds_ && same(nbrs, c.neighbors);
  if (reuse && c.version == rounds_) return c.value;

  NodeContribution& v = c.value;
  if (!reuse) {
    c.neighbors.assign(nbrs.begin(), nbrs.end());
    v.index = reachable_indices(spec_, node, nbrs);
    const auto m = static_cast<Eigen::Index>(v.index.size());
    v.gram = Eigen::MatrixXd::Zero(m, m);
    v.rhs = Eigen::VectorXd::Zero(m);
  }
  for (std::size_t l = 0; l < v.index.size(); ++l) slot_[v.index[l]] = static_cast<int>(l);

  // Small buffer of (local slot, value) for one row.
  std::vector<std::pair<int, double>> row;
  auto add = [&](std::span<const std::uint8_t> z, double weight, double rsum) {
    row.clear();
    detail::visit_features(spec_, z, node, nbrs,
                           [&](std::size_t idx, double val) { row.emplace_back(slot_[idx], val); });
    for (const auto& [p, fp] : row) {
      v.rhs[p] += fp * rsum;
      for (const auto& [q, fq] : row) v.gram(p, q) += weight * fp * fq;
    }
  };

  if (reuse) {
    for (std::size_t s = c.version; s < rounds_; ++s)
      add(pattern(round_pattern_[s]), 1.0, r_log_[s * n + node]);
  } else {
    for (std::size_t p = 0; p < count_.size(); ++p) add(pattern(p), count_[p], rsum_[p * n + node]);
  }
  for (std::size_t idx : v.index) slot_[idx] = -1;
  c.version = rounds_;
  return v;
}

double PatternStats::endpoint_evidence(std::size_t node, std::size_t partner, const Adjacency& a,
                                       const Eigen::VectorXd& theta) {
  std::vector<std::size_t> without, with;
  neighbor_variants(a.neighbors(node), partner, without, with);
  const std::size_t n = spec_.n;
  double ev = 0.0;
  auto term = [&](std::size_t p) {
    const auto z = pattern(p);
    const double e0 = detail::row_dot(spec_, theta, z, node, without);
    const double e1 = detail::row_dot(spec_, theta, z, node, with);
    ev += 2.0 * rsum_[p * n + node] * (e1 - e0) + count_[p] * (e0 * e0 - e1 * e1);
  };
  if (edge_effect_requires_treated_partner(spec_.kind)) {
    for (std::size_t p : treated_in_[partner]) term(p);
  } else {
    for (std::size_t p = 0; p < count_.size(); ++p) term(p);
  }
  return ev;
}

double PatternStats::edge_evidence(std::size_t i, std::size_t j, const Adjacency& a,
                                   const Eigen::VectorXd& theta) {
  if (i == j) throw ParameterError("edge_evidence: i == j");
  return endpoint_evidence(i, j, a, theta) + endpoint_evidence(j, i, a, theta);
}

// ---------------------------------------------------------------------------

LinearMeansStats::LinearMeansStats(RewardSpec spec)
    : SufficientStats(spec),
      gram_(spec.n * spec.n, 0.0),
      cross_(spec.n * spec.n, 0.0),
      cache_(spec.n) {
  if (spec.kind != RewardKind::linear_in_means_per_node)
    throw ParameterError("LinearMeansStats requires linear_in_means_per_node");
}

void LinearMeansStats::append(std::span<const std::uint8_t> z, std::span<const double> r) {
  const std::size_t n = spec_.n;
  if (z.size() != n || r.size() != n) throw ParameterError("stats: round length does not match n");
  treated_.clear();
  for (std::size_t k = 0; k < n; ++k)
    if (z[k]) treated_.push_back(k);
  for (std::size_t k : treated_)
    for (std::size_t l : treated_) gram_[k * n + l] += 1.0;
  for (std::size_t l = 0; l < n; ++l) {
    double* row = cross_.data() + l * n;
    for (std::size_t k : treated_) row[k] += r[l];
  }
  ++rounds_;
}

LinearMeansStats::Cache& LinearMeansStats::refresh(std::size_t node,
                                                   std::span<const std::size_t> nbrs) {
  Cache& c = cache_[node];
  if (c.version == rounds_ && same(nbrs, c.neighbors)) return c;
  c.neighbors.assign(nbrs.begin(), nbrs.end());
  c.version = rounds_;
  const std::size_t n = spec_.n;
  const std::size_t deg = nbrs.size();

  double pair_sum = 0.0, zx = 0.0, rx = 0.0;
  c.col.assign(n, 0.0);
  for (std::size_t k : nbrs) {
    for (std::size_t l : nbrs) pair_sum += g(k, l);
    zx += g(node, k);
    rx += q(node, k);
    const double* row = gram_.data() + k * n;
    for (std::size_t l = 0; l < n; ++l) c.col[l] += row[l];
  }
  c.pair_sum = pair_sum;
  c.zx = zx;
  c.rx = rx;

  NodeContribution& v = c.value;
  if (deg == 0) {
    v.index = {node};
    v.gram.resize(1, 1);
    v.gram(0, 0) = g(node, node);
    v.rhs.resize(1);
    v.rhs[0] = q(node, node);
    return c;
  }
  const double inv = 1.0 / static_cast<double>(deg);
  v.index = {node, n + node};
  v.gram.resize(2, 2);
  v.gram(0, 0) = g(node, node);
  v.gram(0, 1) = v.gram(1, 0) = zx * inv;
  v.gram(1, 1) = pair_sum * inv * inv;
  v.rhs.resize(2);
  v.rhs[0] = q(node, node);
  v.rhs[1] = rx * inv;
  return c;
}

const NodeContribution& LinearMeansStats::node_contribution(std::size_t node,
                                                            std::span<const std::size_t> nbrs) {
  return refresh(node, nbrs).value;
}

double LinearMeansStats::endpoint_evidence(std::size_t node, std::size_t partner,
                                           const Adjacency& a, const Eigen::VectorXd& theta) {
  const auto nbrs = a.neighbors(node);
  const Cache& c = refresh(node, nbrs);
  const std::size_t n = spec_.n;

  // u_s = treated count over N0 = N \ {partner}; moments of u, Z_node, Z_partner.
  const bool linked = a.has_edge(node, partner);
  const std::size_t d0 = nbrs.size() - (linked ? 1 : 0);
  const double mm = g(partner, partner);
  const double ru = c.rx - (linked ? q(node, partner) : 0.0);
  const double zu = c.zx - (linked ? g(node, partner) : 0.0);
  const double um = c.col[partner] - (linked ? mm : 0.0);
  const double uu = linked ? c.pair_sum - 2.0 * um - mm : c.pair_sum;

  const double a0 = d0 ? 1.0 / static_cast<double>(d0) : 0.0;
  const double a1 = 1.0 / static_cast<double>(d0 + 1);
  // Delta = x1 - x0 and Sum = x1 + x0 with x0 = a0 u, x1 = a1 (u + Z_partner).
  const double r_delta = (a1 - a0) * ru + a1 * q(node, partner);
  const double z_delta = (a1 - a0) * zu + a1 * g(node, partner);
  const double delta_sum = (a1 * a1 - a0 * a0) * uu + 2.0 * a1 * a1 * um + a1 * a1 * mm;

  const double mu = theta[static_cast<Eigen::Index>(node)];
  const double beta = theta[static_cast<Eigen::Index>(n + node)];
  return beta * (2.0 * r_delta - 2.0 * mu * z_delta - beta * delta_sum);
}

double LinearMeansStats::edge_evidence(std::size_t i, std::size_t j, const Adjacency& a,
                                       const Eigen::VectorXd& theta) {
  if (i == j) throw ParameterError("edge_evidence: i == j");
  return endpoint_evidence(i, j, a, theta) + endpoint_evidence(j, i, a, theta);
}

std::unique_ptr<SufficientStats> make_stats(const RewardSpec& spec) {
  if (spec.kind == RewardKind::linear_in_means_per_node)
    return std::make_unique<LinearMeansStats>(spec);
  return std::make_unique<PatternStats>(spec);
}

}  // namespace interfere
