#include <charconv>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "interfere/errors.hpp"
#include "interfere/runner.hpp"

namespace interfere {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Shortest round-trip representation, so equal doubles give equal bytes.
std::string num(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string hex(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::string rep_tag(std::size_t rep) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "rep%03zu", rep);
  return buf;
}

std::ofstream open(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

json quantiles(const Quantiles& q) {
  return {{"median", q.median}, {"q25", q.q25},   {"q75", q.q75},
          {"iqr", q.q75 - q.q25}, {"mean", q.mean}, {"trimmed_mean", q.trimmed_mean}};
}

json seed_ledger(std::span<const ReplicationResult> results) {
  json seeds = json::array();
  for (const auto& r : results)
    seeds.push_back({{"rep", r.rep},
                     {"seed", r.seed},
                     {"streams", {{"environment", 1}, {"policy", 2}, {"noise", 3}, {"inference", 4}}}});
  return seeds;
}

void write_marginals(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << num(m(i, j));
    out << '\n';
  }
}

}  // namespace

void write_round_csv(std::ostream& out, const PolicyRun& run, double f_opt) {
  out << "t,regret_inst,regret_cum,f_opt,f_chosen,n_treated,f1_snapshot,acc_snapshot\n";
  for (std::size_t t = 0; t < run.rounds.size(); ++t) {
    const RoundRecord& r = run.rounds[t];
    out << t + 1 << ',' << num(r.regret_inst) << ',' << num(r.regret_cum) << ',' << num(f_opt) << ','
        << num(r.f_chosen) << ',' << r.n_treated << ',';
    if (r.f1_snapshot) out << num(*r.f1_snapshot);
    out << ',';
    if (r.acc_snapshot) out << num(*r.acc_snapshot);
    out << '\n';
  }
}

std::vector<std::string> write_run(const fs::path& dir, const RunConfig& cfg,
                                   std::span<const ReplicationResult> results) {
  std::vector<std::string> files;
  auto emit = [&](const std::string& rel, auto&& body) {
    const fs::path path = dir / rel;
    auto out = open(path);
    body(out);
    finish(out, path);
    files.push_back(rel);
  };

  json reps = json::array();
  json timing = json::array();
  for (const auto& r : results) {
    json per = json::object();
    json secs = json::object();
    for (const auto& run : r.policies) {
      const std::string stem = run.label + "_" + rep_tag(r.rep);
      emit("reps/" + stem + ".csv", [&](std::ostream& o) { write_round_csv(o, run, r.optimum.value); });
      if (run.a_hat)
        emit("graphs/" + stem + "_edges.txt", [&](std::ostream& o) { write_edge_list(*run.a_hat, o); });
      if (run.marginals)
        emit("graphs/" + stem + "_marginals.csv", [&](std::ostream& o) { write_marginals(o, *run.marginals); });
      per[run.label] = {{"final_regret", run.cumulative_regret()},
                        {"first_half_regret", run.first_half_regret()},
                        {"second_half_regret", run.second_half_regret()},
                        {"realized_reward_total", run.realized_total()},
                        {"final_f1", run.final_f1},
                        {"final_accuracy", run.final_accuracy}};
      secs[run.label] = run.seconds;
    }
    emit("graphs/true_" + rep_tag(r.rep) + "_edges.txt",
         [&](std::ostream& o) { write_edge_list(r.env.graph, o); });
    reps.push_back({{"rep", r.rep},
                    {"seed", r.seed},
                    {"env_hash", hex(r.env_hash)},
                    {"f_opt", r.optimum.value},
                    {"policies", per}});
    timing.push_back({{"rep", r.rep}, {"seconds", secs}});
  }

  json policies = json::object();
  for (const auto& s : summarize(cfg, results))
    policies[s.label] = {{"final_regret", quantiles(s.regret)},
                         {"final_f1", quantiles(s.f1)},
                         {"final_accuracy", quantiles(s.accuracy)}};

  json summary = {{"name", cfg.name},
                  {"config_hash", hex(config_hash(cfg))},
                  {"regret_kind", "expected"},
                  {"horizon", cfg.horizon},
                  {"budget", cfg.budget},
                  {"replications", results.size()},
                  {"policies", policies},
                  {"per_replication", reps},
                  {"seeds", seed_ledger(results)},
                  {"config", json::parse(cfg.source)}};
  emit("summary.json", [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
  emit("timing.json", [&](std::ostream& o) { o << timing.dump(2) << '\n'; });

  const json manifest = {{"config_hash", hex(config_hash(cfg))},
                         {"files", files},
                         {"seeds", seed_ledger(results)}};
  emit("manifest.json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
  return files;
}

std::vector<std::string> write_recovery(const fs::path& dir, const RunConfig& cfg,
                                        std::span<const ReplicationResult> results) {
  std::vector<std::string> files;
  auto emit = [&](const std::string& rel, auto&& body) {
    const fs::path path = dir / rel;
    auto out = open(path);
    body(out);
    finish(out, path);
    files.push_back(rel);
  };
  for (const auto& r : results) {
    emit("graphs/true_" + rep_tag(r.rep) + "_edges.txt", [&](std::ostream& o) { write_edge_list(r.env.graph, o); });
    for (const auto& run : r.policies) {
      const std::string stem = run.label + "_" + rep_tag(r.rep);
      if (run.a_hat) emit("graphs/" + stem + "_edges.txt", [&](std::ostream& o) { write_edge_list(*run.a_hat, o); });
      if (run.marginals)
        emit("graphs/" + stem + "_marginals.csv", [&](std::ostream& o) { write_marginals(o, *run.marginals); });
    }
  }
  const json manifest = {{"config_hash", hex(config_hash(cfg))},
                         {"files", files},
                         {"seeds", seed_ledger(results)}};
  emit("manifest.json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
  return files;
}

std::vector<std::string> write_sweep(const fs::path& dir, const RunConfig& cfg, std::string_view axis,
                                     std::span<const SweepCell> cells) {
  std::vector<std::string> files;
  const fs::path table = dir / "sweep.csv";
  {
    auto out = open(table);
    out << "axis,value,label,median,q25,q75,iqr,mean,trimmed_mean,f1_median,accuracy_median,"
           "env_hash_rep0\n";
    for (const auto& c : cells)
      for (const auto& s : c.summary)
        out << axis << ',' << c.value << ',' << s.label << ',' << num(s.regret.median) << ','
            << num(s.regret.q25) << ',' << num(s.regret.q75) << ','
            << num(s.regret.q75 - s.regret.q25) << ',' << num(s.regret.mean) << ','
            << num(s.regret.trimmed_mean) << ',' << num(s.f1.median) << ','
            << num(s.accuracy.median) << ','
            << (c.env_hashes.empty() ? std::string() : hex(c.env_hashes.front())) << '\n';
    finish(out, table);
  }
  files.push_back("sweep.csv");

  json cell_index = json::array();
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const std::string sub = "cell" + std::to_string(k);
    for (const auto& f : write_run(dir / sub, cells[k].config, cells[k].results))
      files.push_back(sub + "/" + f);
    json hashes = json::array();
    for (auto h : cells[k].env_hashes) hashes.push_back(hex(h));
    cell_index.push_back({{"value", cells[k].value},
                          {"dir", sub},
                          {"base_seed", cells[k].config.replications.base_seed},
                          {"env_hashes", hashes}});
  }
  const json manifest = {{"config_hash", hex(config_hash(cfg))},
                         {"axis", axis},
                         {"cells", cell_index},
                         {"files", files}};
  const fs::path mpath = dir / "manifest.json";
  auto out = open(mpath);
  out << manifest.dump(2) << '\n';
  finish(out, mpath);
  files.push_back("manifest.json");
  return files;
}

std::vector<std::string> write_causal(const fs::path& dir, std::span<const ReplicationResult> results) {
  struct Column {
    std::string name;
    std::vector<EstimandTriple> est, truth;
  };
  std::vector<Column> columns;
  std::vector<EstimandTriple> truths;
  auto column = [&](const std::string& name) -> Column& {
    for (auto& c : columns)
      if (c.name == name) return c;
    return columns.emplace_back(Column{name, {}, {}});
  };

  const fs::path long_path = dir / "causal_reps.csv";
  auto lng = open(long_path);
  lng << "rep,label,estimator,tau_d,tau_i1,tau_tte,truth_tau_d,truth_tau_i1,truth_tau_tte,ridge\n";
  auto row = [&](std::size_t rep, const std::string& label, const char* estimator,
                 const EstimandTriple& e, const EstimandTriple& t, bool ridge) {
    lng << rep << ',' << label << ',' << estimator << ',' << num(e.tau_d) << ',' << num(e.tau_i1)
        << ',' << num(e.tau_tte) << ',' << num(t.tau_d) << ',' << num(t.tau_i1) << ','
        << num(t.tau_tte) << ',' << (ridge ? 1 : 0) << '\n';
    Column& c = column(label + ":" + estimator);
    c.est.push_back(e);
    c.truth.push_back(t);
  };
  for (const auto& r : results) {
    bool truth_added = false;
    for (const auto& run : r.policies) {
      if (!run.causal) continue;
      const CausalRecord& c = *run.causal;
      if (!truth_added) {
        truths.push_back(c.truth);
        truth_added = true;
      }
      if (c.posterior) row(r.rep, run.label, "posterior_ahat", *c.posterior, c.truth, false);
      row(r.rep, run.label, "ols_ahat", c.ols_hat, c.truth, c.ridge_hat);
      row(r.rep, run.label, "ols_true_a", c.ols_true, c.truth, c.ridge_true);
    }
  }
  finish(lng, long_path);
  if (truths.empty()) throw ParameterError("write_causal: no causal records (run with estimation on)");

  const fs::path table_path = dir / "causal_table.csv";
  auto tab = open(table_path);
  tab << "estimand,truth_mean";
  for (const auto& c : columns) tab << ',' << c.name;
  tab << '\n';
  std::vector<EstimandTriple> errs;
  for (const auto& c : columns) errs.push_back(rmse(c.est, c.truth));
  auto mean_of = [&](double EstimandTriple::*field) {
    double s = 0.0;
    for (const auto& t : truths) s += t.*field;
    return s / static_cast<double>(truths.size());
  };
  const std::pair<const char*, double EstimandTriple::*> rows[] = {
      {"tau_d", &EstimandTriple::tau_d},
      {"tau_i1", &EstimandTriple::tau_i1},
      {"tau_tte", &EstimandTriple::tau_tte}};
  for (const auto& [name, field] : rows) {
    tab << name << ',' << num(mean_of(field));
    for (const auto& e : errs) tab << ',' << num(e.*field);
    tab << '\n';
  }
  finish(tab, table_path);
  return {"causal_reps.csv", "causal_table.csv"};
}

}  // namespace interfere
