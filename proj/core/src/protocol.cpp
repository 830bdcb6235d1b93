#include "interfere/protocol.hpp"

#include <set>

#include "interfere/errors.hpp"

namespace interfere {

double Distribution::draw(Rng& rng, std::size_t bucket) const {
  switch (type) {
    case Type::constant: return a;
    case Type::uniform: return a + (b - a) * uniform01(rng);
    case Type::normal: return a + b * standard_normal(rng);
    case Type::normal_indexed: return a * static_cast<double>(bucket) + b * standard_normal(rng);
  }
  return a;
}

ParamProtocol builtin_protocol(std::string_view name) {
  using D = Distribution;
  ParamProtocol p;
  p.name = std::string(name);
  if (name == "head_to_head_small_xi" || name == "head_to_head_large_xi") {
    const double xi = name == "head_to_head_small_xi" ? 0.4 : 3.0;
    p.blocks = {{"mu", D::uniform(0.5, 1.5)}, {"gamma", D::uniform(0.3, 1.0)},
                {"xi", D::uniform(-xi, xi)}};
  } else if (name == "additive" || name == "spec_a") {
    p.blocks = {{"mu", D::uniform(0.5, 1.5)}, {"gamma", D::uniform(0.3, 1.0)}};
  } else if (name == "spec_b") {
    p.blocks = {{"mu", D::uniform(0.5, 1.5)}, {"gamma", D::uniform(0.3, 1.0)},
                {"lambda", D::uniform(-0.3, 0.3)}};
  } else if (name == "village") {
    p.blocks = {{"mu", D::uniform(0.0, 1.0)}, {"beta", D::uniform(0.0, 1.0)}};
  } else if (name == "count_based") {
    p.blocks = {{"mu", D::normal(1.0, 0.2)}, {"gamma", D::normal_indexed(1.0, 0.5)}};
  } else if (name == "linear_means_shared") {
    p.blocks = {{"mu", D::normal(2.0, 1.0)}, {"beta", D::normal(1.0, 0.5)}};
    p.shared = true;
  } else if (name == "paired") {
    p.blocks = {{"mu", D::constant(0.0)}, {"gamma", D::constant(1.0)}};
  } else {
    throw ParameterError("unknown parameter protocol '" + std::string(name) + "'");
  }
  return p;
}

std::vector<std::string> builtin_protocol_names() {
  return {"head_to_head_small_xi", "head_to_head_large_xi", "additive", "spec_a", "spec_b",
          "village", "count_based", "linear_means_shared", "paired"};
}

Eigen::VectorXd sample_params(const RewardSpec& spec, const ParamProtocol& protocol, Rng& rng) {
  const auto blocks = theta_blocks(spec);
  std::set<std::string> wanted, given;
  for (const auto& b : blocks) wanted.insert(b.name);
  for (const auto& [name, dist] : protocol.blocks) given.insert(name);
  if (wanted != given) {
    std::string msg = "protocol '" + protocol.name + "' does not match reward kind " +
                      std::string(to_string(spec.kind)) + " (needs blocks:";
    for (const auto& w : wanted) msg += " " + w;
    throw ParameterError(msg + ")");
  }

  Eigen::VectorXd theta(static_cast<Eigen::Index>(spec.dimension()));
  for (const auto& block : blocks) {
    const Distribution& dist = protocol.blocks.at(block.name);
    const std::size_t distinct = protocol.shared ? std::max<std::size_t>(block.period, 1) : block.length;
    std::vector<double> draws(distinct);
    for (std::size_t e = 0; e < distinct; ++e) {
      const std::size_t bucket = block.period ? e % block.period + 1 : 0;
      draws[e] = dist.draw(rng, bucket);
    }
    for (std::size_t e = 0; e < block.length; ++e) {
      const std::size_t src = protocol.shared ? (block.period ? e % block.period : 0) : e;
      theta[static_cast<Eigen::Index>(block.offset + e)] = draws[src];
    }
  }
  return theta;
}

}  // namespace interfere
