#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "interfere/graph.hpp"
#include "interfere/policy.hpp"
#include "interfere/protocol.hpp"
#include "interfere/reward_model.hpp"

namespace interfere {

struct EnvironmentConfig {
  GraphGenSpec graph;  // seed is filled in per replication
  std::size_t n = 0;
  RewardSpec reward;
  ParamProtocol protocol;
  double sigma = 1.0;
};

struct ReplicationConfig {
  std::size_t count = 1;
  std::uint64_t base_seed = 1000;
  bool matched_seeds = true;
};

struct CausalConfig {
  std::size_t eval_horizon = 2000;
  double treat_prob = 0.0;  // 0: B / n
  double ridge_lambda = 0.01;
  double threshold = 0.5;
};

struct RunConfig {
  std::string name;
  EnvironmentConfig environment;
  std::size_t horizon = 1;
  std::size_t budget = 1;
  std::vector<PolicySpec> policies;
  ReplicationConfig replications;
  std::size_t snapshot_every = 100;
  std::size_t marginal_sweeps = 50;
  CausalConfig causal;
  std::filesystem::path output = "out";
  std::string source;  // normalized JSON text the config was parsed from
};

/// Parses and validates a JSON config. Throws ConfigError naming the
/// offending key (dotted path, e.g. "policies[1].etc.m").
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Returns a copy of `cfg` with one key replaced, re-validated. `axis` is a
/// dotted path into the JSON ("environment.sigma", "horizon") or one of the
/// aliases rho, K, m, which apply to every policy. `value` is parsed as JSON
/// when possible and taken as a string otherwise.
RunConfig with_override(const RunConfig& cfg, std::string_view axis, std::string_view value);

/// Canonical name of a sweep axis (aliases resolved).
std::string canonical_axis(std::string_view axis);

/// Human-readable schema with defaults.
std::string config_schema();

/// 64-bit FNV-1a of the normalized source.
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace interfere
