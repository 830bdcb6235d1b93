#include "interfere/reward_model.hpp"

#include <array>
#include <utility>

#include "interfere/detail/features.hpp"
#include "interfere/errors.hpp"

namespace interfere {

namespace {

constexpr std::array<std::pair<RewardKind, std::string_view>, 8> kKindNames{{
    {RewardKind::linear_in_means_per_node, "linear_in_means_per_node"},
    {RewardKind::count_based_shared, "count_based_shared"},
    {RewardKind::count_based_per_node, "count_based_per_node"},
    {RewardKind::pairwise_nia, "pairwise_nia"},
    {RewardKind::additive_pairs, "additive_pairs"},
    {RewardKind::saturation_spec_a, "saturation_spec_a"},
    {RewardKind::interaction_spec_b, "interaction_spec_b"},
    {RewardKind::paired_indicator, "paired_indicator"},
}};

bool is_count_based(RewardKind k) {
  return k == RewardKind::count_based_shared || k == RewardKind::count_based_per_node;
}

void check_inputs(const RewardSpec& spec, std::span<const std::uint8_t> z, const Adjacency& a) {
  if (z.size() != spec.n) throw ParameterError("treatment length does not match n");
  if (a.size() != spec.n) throw ParameterError("graph size does not match n");
}

void check_theta(const RewardSpec& spec, const Eigen::VectorXd& theta) {
  if (static_cast<std::size_t>(theta.size()) != spec.dimension())
    throw ParameterError("theta has length " + std::to_string(theta.size()) + ", expected " +
                         std::to_string(spec.dimension()));
}

}  // namespace

std::string_view to_string(RewardKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

RewardKind parse_reward_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  if (name == "linear_in_means") return RewardKind::linear_in_means_per_node;
  throw ParameterError("unknown reward kind '" + std::string(name) + "'");
}

std::size_t RewardSpec::dimension() const {
  using detail::choose2;
  switch (kind) {
    case RewardKind::linear_in_means_per_node: return 2 * n;
    case RewardKind::count_based_shared: return 1 + d_max;
    case RewardKind::count_based_per_node: return n * (1 + d_max);
    case RewardKind::pairwise_nia: return n + choose2(n) + n * choose2(n - 1);
    case RewardKind::additive_pairs: return n + choose2(n);
    case RewardKind::saturation_spec_a: return n + choose2(n);
    case RewardKind::interaction_spec_b: return n + choose2(n) + n;
    case RewardKind::paired_indicator: return 2;
  }
  return 0;
}

RewardSpec make_spec(RewardKind kind, std::size_t n, std::size_t d_max) {
  if (n < 2) throw ParameterError("reward spec needs n >= 2");
  if (is_count_based(kind) && d_max == 0)
    throw ParameterError("count-based reward spec needs d_max >= 1");
  return RewardSpec{kind, n, is_count_based(kind) ? d_max : 0};
}

bool is_collapsible(RewardKind kind) {
  return kind == RewardKind::linear_in_means_per_node || kind == RewardKind::additive_pairs;
}

bool edge_effect_requires_treated_partner(RewardKind kind) {
  return kind != RewardKind::linear_in_means_per_node;
}

std::vector<ThetaBlock> theta_blocks(const RewardSpec& spec) {
  using detail::choose2;
  const std::size_t n = spec.n;
  switch (spec.kind) {
    case RewardKind::linear_in_means_per_node:
      return {{"mu", 0, n}, {"beta", n, n}};
    case RewardKind::count_based_shared:
      return {{"mu", 0, 1}, {"gamma", 1, spec.d_max, spec.d_max}};
    case RewardKind::count_based_per_node:
      return {{"mu", 0, n}, {"gamma", n, n * spec.d_max, spec.d_max}};
    case RewardKind::pairwise_nia:
      return {{"mu", 0, n}, {"gamma", n, choose2(n)}, {"xi", n + choose2(n), n * choose2(n - 1)}};
    case RewardKind::additive_pairs:
    case RewardKind::saturation_spec_a:
      return {{"mu", 0, n}, {"gamma", n, choose2(n)}};
    case RewardKind::interaction_spec_b:
      return {{"mu", 0, n}, {"gamma", n, choose2(n)}, {"lambda", n + choose2(n), n}};
    case RewardKind::paired_indicator:
      return {{"mu", 0, 1}, {"gamma", 1, 1}};
  }
  return {};
}

ParameterLayout parameter_layout(const RewardSpec& spec) {
  const std::size_t n = spec.n, d = spec.dimension();
  ParameterLayout layout;
  layout.block_of_node.assign(n, 0);
  layout.block_of_index.assign(d, 0);
  layout.local_index.assign(d, 0);
  if (spec.kind == RewardKind::linear_in_means_per_node) {
    for (std::size_t i = 0; i < n; ++i) {
      layout.blocks.push_back({i, n + i});
      layout.block_of_node[i] = i;
    }
  } else if (spec.kind == RewardKind::count_based_per_node) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> block{i};
      for (std::size_t k = 0; k < spec.d_max; ++k) block.push_back(n + i * spec.d_max + k);
      layout.blocks.push_back(std::move(block));
      layout.block_of_node[i] = i;
    }
  } else {
    std::vector<std::size_t> all(d);
    for (std::size_t k = 0; k < d; ++k) all[k] = k;
    layout.blocks.push_back(std::move(all));
  }
  for (std::size_t b = 0; b < layout.blocks.size(); ++b)
    for (std::size_t l = 0; l < layout.blocks[b].size(); ++l) {
      layout.block_of_index[layout.blocks[b][l]] = b;
      layout.local_index[layout.blocks[b][l]] = l;
    }
  return layout;
}

void node_features(const RewardSpec& spec, std::span<const std::uint8_t> z, std::size_t node,
                   std::span<const std::size_t> neighbors, std::vector<Feature>& out) {
  out.clear();
  detail::visit_features(spec, z, node, neighbors,
                         [&](std::size_t idx, double v) { out.push_back({idx, v}); });
}

Eigen::VectorXd design_row(const RewardSpec& spec, std::span<const std::uint8_t> z,
                           const Adjacency& a, std::size_t node) {
  check_inputs(spec, z, a);
  if (node >= spec.n) throw ParameterError("design_row: node out of range");
  Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.dimension()));
  detail::visit_features(spec, z, node, a.neighbors(node),
                         [&](std::size_t idx, double v) { row[static_cast<Eigen::Index>(idx)] = v; });
  return row;
}

Eigen::MatrixXd design_matrix(const RewardSpec& spec, std::span<const std::uint8_t> z,
                              const Adjacency& a) {
  check_inputs(spec, z, a);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(spec.n),
                                            static_cast<Eigen::Index>(spec.dimension()));
  for (std::size_t i = 0; i < spec.n; ++i)
    detail::visit_features(spec, z, i, a.neighbors(i), [&](std::size_t idx, double v) {
      h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(idx)) = v;
    });
  return h;
}

double node_reward(const RewardSpec& spec, const Eigen::VectorXd& theta,
                   std::span<const std::uint8_t> z, std::size_t node,
                   std::span<const std::size_t> neighbors) {
  return detail::row_dot(spec, theta, z, node, neighbors);
}

Eigen::VectorXd expected_rewards(const RewardSpec& spec, const Eigen::VectorXd& theta,
                                 const Adjacency& a, std::span<const std::uint8_t> z) {
  check_inputs(spec, z, a);
  check_theta(spec, theta);
  Eigen::VectorXd r(static_cast<Eigen::Index>(spec.n));
  for (std::size_t i = 0; i < spec.n; ++i)
    r[static_cast<Eigen::Index>(i)] = detail::row_dot(spec, theta, z, i, a.neighbors(i));
  return r;
}

double total_reward(const RewardSpec& spec, const Eigen::VectorXd& theta, const Adjacency& a,
                    std::span<const std::uint8_t> z) {
  check_inputs(spec, z, a);
  check_theta(spec, theta);
  double total = 0.0;
  for (std::size_t i = 0; i < spec.n; ++i)
    total += detail::row_dot(spec, theta, z, i, a.neighbors(i));
  return total;
}

Eigen::VectorXd sample_rewards(const Environment& env, std::span<const std::uint8_t> z, Rng& rng) {
  Eigen::VectorXd r = expected_rewards(env.spec, env.theta, env.graph, z);
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] += env.sigma * standard_normal(rng);
  return r;
}

std::optional<ModularScores> modular_scores(const RewardSpec& spec, const Eigen::VectorXd& theta,
                                            const Adjacency& a) {
  if (!is_collapsible(spec.kind)) return std::nullopt;
  check_theta(spec, theta);
  if (a.size() != spec.n) throw ParameterError("graph size does not match n");
  const std::size_t n = spec.n;
  ModularScores out;
  out.s = theta.head(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    double spill = 0.0;
    for (std::size_t i : a.neighbors(j)) {
      if (spec.kind == RewardKind::linear_in_means_per_node)
        spill += theta[static_cast<Eigen::Index>(n + i)] / static_cast<double>(a.degree(i));
      else
        spill += theta[static_cast<Eigen::Index>(n + pair_index(n, i, j))];
    }
    out.s[static_cast<Eigen::Index>(j)] += spill;
  }
  return out;
}

std::uint64_t environment_hash(const Environment& env) {
  Fnv1a h;
  h.update(to_string(env.spec.kind));
  const std::uint64_t dims[2] = {env.spec.n, env.spec.d_max};
  h.update(dims, sizeof dims);
  h.update(env.graph.dense().data(), env.graph.dense().size());
  h.update(env.theta.data(), sizeof(double) * static_cast<std::size_t>(env.theta.size()));
  h.update(&env.sigma, sizeof env.sigma);
  return h.digest();
}

}  // namespace interfere
