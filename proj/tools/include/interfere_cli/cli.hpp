#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string_view>

namespace interfere::cli {

enum ExitCode : int { ok = 0, runtime_failure = 1, config_error = 2 };

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// A path to an existing file is returned as is. Otherwise `name` (with or
/// without ".json") is looked up in $INTERFERE_CONFIG_DIR, then in the
/// bundled configs directory. Throws ConfigError("config") when not found.
std::filesystem::path resolve_config(std::string_view name);

/// Worker count: explicit value if nonzero, else $INTERFERE_WORKERS, else 1.
std::size_t resolve_workers(std::size_t requested);

struct OracleOptions {
  std::size_t n = 4;
  std::size_t rounds = 30;
  std::uint64_t seed = 7;
  double sigma = 0.5;
  std::size_t d_max = 3;
  double rho = 0.3;
  double prior_var = 10.0;
  std::size_t burn_in = 500;
  std::size_t sweeps = 5000;
};

struct OracleReport {
  Eigen::MatrixXd exact;
  Eigen::MatrixXd gibbs;  // fraction of post-burn-in sweeps with A_ij = 1
  double max_gap = 0.0;
  double seconds = 0.0;
};

/// Count-based instance with a random graph and Bernoulli(1/2) treatments;
/// compares long-run Gibbs edge frequencies with enumeration.
OracleReport oracle_check(const OracleOptions& options);

}  // namespace interfere::cli
