#include "interfere_cli/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

#include "interfere/config.hpp"
#include "interfere/errors.hpp"
#include "interfere/runner.hpp"

#ifndef INTERFERE_DEFAULT_CONFIG_DIR
#define INTERFERE_DEFAULT_CONFIG_DIR "configs"
#endif

namespace interfere::cli {

namespace fs = std::filesystem;

fs::path resolve_config(std::string_view name) {
  const fs::path direct(name);
  if (fs::is_regular_file(direct)) return direct;
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("INTERFERE_CONFIG_DIR")) dirs.emplace_back(env);
  dirs.emplace_back(INTERFERE_DEFAULT_CONFIG_DIR);
  for (const auto& d : dirs) {
    for (const fs::path& cand : {d / direct, d / (std::string(name) + ".json")})
      if (fs::is_regular_file(cand)) return cand;
  }
  throw ConfigError("config", "no config file or bundled config named '" + std::string(name) + "'");
}

std::size_t resolve_workers(std::size_t requested) {
  if (requested) return requested;
  if (const char* env = std::getenv("INTERFERE_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return 1;
}

namespace {

struct Common {
  std::string config;
  std::string out;
  std::size_t workers = 0;
  std::int64_t seed = -1;
  std::int64_t reps = -1;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config, "config file or bundled config name")->required();
  app->add_option("-o,--out", c.out, "output directory (default: the config's output)");
  app->add_option("-w,--workers", c.workers, "parallel replications (default: $INTERFERE_WORKERS or 1)");
  app->add_option("--seed-override", c.seed, "replace replications.base_seed");
  app->add_option("--reps", c.reps, "replace replications.count");
}

RunConfig load(const Common& c) {
  RunConfig cfg = load_config(resolve_config(c.config));
  if (c.seed >= 0) cfg = with_override(cfg, "replications.base_seed", std::to_string(c.seed));
  if (c.reps >= 0) cfg = with_override(cfg, "replications.count", std::to_string(c.reps));
  return cfg;
}

fs::path out_dir(const Common& c, const RunConfig& cfg) { return c.out.empty() ? cfg.output : fs::path(c.out); }

void print_summary(std::ostream& out, const std::vector<PolicySummary>& summary) {
  out << std::left << std::setw(24) << "policy" << std::right << std::setw(14) << "median_regret"
      << std::setw(12) << "iqr" << std::setw(10) << "f1" << '\n';
  for (const auto& s : summary)
    out << std::left << std::setw(24) << s.label << std::right << std::fixed << std::setprecision(2)
        << std::setw(14) << s.regret.median << std::setw(12) << s.regret.q75 - s.regret.q25
        << std::setprecision(3) << std::setw(10) << s.f1.median << '\n'
        << std::defaultfloat;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive treatment allocation under unknown network interference"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, recover_opts, estimate_opts;
  auto* run_cmd = app.add_subcommand("run", "run every replication and write CSVs and a summary");
  add_common(run_cmd, run_opts);

  auto* sweep_cmd = app.add_subcommand("sweep", "run one cell per grid value of a config key");
  add_common(sweep_cmd, sweep_opts);
  std::string axis;
  std::vector<std::string> grid;
  sweep_cmd->add_option("-a,--axis", axis, "dotted config key or alias (rho, K, m, sigma, T, B)")->required();
  sweep_cmd->add_option("-g,--grid", grid, "comma-separated values")->required()->delimiter(',');

  auto* recover_cmd = app.add_subcommand("recover", "write the estimated graph and edge marginals only");
  add_common(recover_cmd, recover_opts);

  auto* estimate_cmd = app.add_subcommand("estimate", "adaptive phase, randomized phase, effect estimates");
  add_common(estimate_cmd, estimate_opts);

  OracleOptions oracle;
  double tolerance = 0.05;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Gibbs edge marginals vs exact enumeration");
  oracle_cmd->add_option("--n", oracle.n, "nodes (C(n,2) <= 15)")->capture_default_str();
  oracle_cmd->add_option("--rounds", oracle.rounds, "random-treatment rounds")->capture_default_str();
  oracle_cmd->add_option("--seed", oracle.seed)->capture_default_str();
  oracle_cmd->add_option("--sigma", oracle.sigma)->capture_default_str();
  oracle_cmd->add_option("--burn-in", oracle.burn_in)->capture_default_str();
  oracle_cmd->add_option("--sweeps", oracle.sweeps)->capture_default_str();
  oracle_cmd->add_option("--tolerance", tolerance, "max allowed absolute gap")->capture_default_str();

  auto* schema_cmd = app.add_subcommand("describe-config", "print the config schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << "error: " << e.what() << "\n" << sub->help();
    return config_error;
  }

  try {
    if (schema_cmd->parsed()) {
      out << config_schema();
    } else if (oracle_cmd->parsed()) {
      const OracleReport rep = oracle_check(oracle);
      out << "pair,exact,gibbs,gap\n";
      for (Eigen::Index i = 0; i < rep.exact.rows(); ++i)
        for (Eigen::Index j = i + 1; j < rep.exact.cols(); ++j)
          out << i << '-' << j << ',' << rep.exact(i, j) << ',' << rep.gibbs(i, j) << ','
              << std::abs(rep.gibbs(i, j) - rep.exact(i, j)) << '\n';
      out << "max_gap " << rep.max_gap << " tolerance " << tolerance << " seconds " << rep.seconds << '\n';
      return rep.max_gap <= tolerance ? ok : runtime_failure;
    } else if (run_cmd->parsed()) {
      const RunConfig cfg = load(run_opts);
      const auto results = run_replications(cfg, resolve_workers(run_opts.workers));
      const fs::path dir = out_dir(run_opts, cfg);
      write_run(dir, cfg, results);
      print_summary(out, summarize(cfg, results));
      out << "wrote " << dir.string() << '\n';
    } else if (sweep_cmd->parsed()) {
      const RunConfig cfg = load(sweep_opts);
      const auto cells = run_sweep(cfg, axis, grid, resolve_workers(sweep_opts.workers));
      const fs::path dir = out_dir(sweep_opts, cfg);
      write_sweep(dir, cfg, axis, cells);
      for (const auto& c : cells) {
        out << axis << " = " << c.value << '\n';
        print_summary(out, c.summary);
      }
      out << "wrote " << dir.string() << '\n';
    } else if (recover_cmd->parsed()) {
      const RunConfig cfg = load(recover_opts);
      const auto results = run_replications(cfg, resolve_workers(recover_opts.workers));
      const fs::path dir = out_dir(recover_opts, cfg);
      write_recovery(dir, cfg, results);
      print_summary(out, summarize(cfg, results));
      out << "wrote " << dir.string() << '\n';
    } else if (estimate_cmd->parsed()) {
      const RunConfig cfg = load(estimate_opts);
      RunOptions opts;
      opts.causal = true;
      const auto results = run_replications(cfg, resolve_workers(estimate_opts.workers), opts);
      const fs::path dir = out_dir(estimate_opts, cfg);
      write_run(dir, cfg, results);
      write_causal(dir, results);
      std::ifstream table(dir / "causal_table.csv");
      out << table.rdbuf();
      out << "wrote " << dir.string() << '\n';
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return runtime_failure;
  }
  return ok;
}

}  // namespace interfere::cli
