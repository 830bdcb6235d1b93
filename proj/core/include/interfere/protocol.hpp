#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "interfere/reward_model.hpp"
#include "interfere/rng.hpp"

namespace interfere {

/// Scalar distribution for one theta block.
///   constant(a)            -> a
///   uniform(a, b)          -> U[a, b]
///   normal(a, b)           -> N(a, b^2), b is the standard deviation
///   normal_indexed(a, b)   -> N(a * k, b^2) for bucket k = 1..d_max
struct Distribution {
  enum class Type { constant, uniform, normal, normal_indexed };
  Type type = Type::constant;
  double a = 0.0;
  double b = 0.0;

  double draw(Rng& rng, std::size_t bucket) const;

  static Distribution constant(double v) { return {Type::constant, v, 0.0}; }
  static Distribution uniform(double lo, double hi) { return {Type::uniform, lo, hi}; }
  static Distribution normal(double mean, double sd) { return {Type::normal, mean, sd}; }
  static Distribution normal_indexed(double scale, double sd) {
    return {Type::normal_indexed, scale, sd};
  }
};

/// Distribution per named theta block. With `shared`, one value is drawn per
/// block (per bucket for bucket-indexed blocks) and copied to every entry.
struct ParamProtocol {
  std::string name;
  std::map<std::string, Distribution> blocks;
  bool shared = false;
};

/// Built-in parameter tables:
///   head_to_head_small_xi  mu~U[0.5,1.5], gamma~U[0.3,1.0], xi~U[-0.4,0.4]
///   head_to_head_large_xi  same with xi~U[-3,3]
///   additive, spec_a       mu~U[0.5,1.5], gamma~U[0.3,1.0]
///   spec_b                 spec_a plus lambda~U[-0.3,0.3]
///   village                mu, beta ~ U[0,1]
///   count_based            mu~N(1,0.2), gamma_k~N(k,0.5)
///   linear_means_shared    mu~N(2,1), beta~N(1,0.5), one draw shared by all nodes
///   paired                 mu=0, gamma_1=1
ParamProtocol builtin_protocol(std::string_view name);
std::vector<std::string> builtin_protocol_names();

/// Draws theta block by block in layout order. Throws ParameterError when
/// the protocol's block names differ from the spec's.
Eigen::VectorXd sample_params(const RewardSpec& spec, const ParamProtocol& protocol, Rng& rng);

}  // namespace interfere
