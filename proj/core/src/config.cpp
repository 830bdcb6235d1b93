#include "interfere/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "interfere/errors.hpp"
#include "interfere/rng.hpp"

namespace interfere {

namespace {

using json = nlohmann::json;

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void allow_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (auto a : keys) ok = ok || a == k;
    if (!ok) throw ConfigError(join(path, k), "unknown key");
  }
}

const json* find(const json& obj, std::string_view key) {
  const auto it = obj.find(std::string(key));
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const std::string& path, std::string_view key) {
  const json* v = find(obj, key);
  if (!v) throw ConfigError(join(path, key), "missing required key");
  return *v;
}

double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(key, "expected a finite number");
  return x;
}

double number_or(const json& obj, const std::string& path, std::string_view key, double dflt) {
  const json* v = find(obj, key);
  return v ? number(*v, join(path, key)) : dflt;
}

std::size_t count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(key, "expected a non-negative integer");
  return v.get<std::size_t>();
}

std::size_t count_or(const json& obj, const std::string& path, std::string_view key,
                     std::size_t dflt) {
  const json* v = find(obj, key);
  return v ? count(*v, join(path, key)) : dflt;
}

std::string text(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

double probability(const json& v, const std::string& key, std::size_t n) {
  double p;
  if (v.is_string() && v.get<std::string>() == "1/n")
    p = 1.0 / static_cast<double>(n);
  else
    p = number(v, key);
  if (p < 0.0 || p > 1.0) throw ConfigError(key, "probability must lie in [0, 1]");
  return p;
}

template <class F>
auto wrap(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ParameterError& e) {
    throw ConfigError(key, e.what());
  }
}

GraphGenSpec parse_graph(const json& g, const std::string& path, std::size_t n,
                         const std::filesystem::path& base_dir) {
  allow_keys(g, path, {"family", "p", "groups", "p_within", "p_between", "path"});
  GraphGenSpec spec;
  const std::string family = text(require(g, path, "family"), join(path, "family"));
  if (family == "erdos_renyi") {
    spec.family = GraphFamily::erdos_renyi;
    spec.p = probability(require(g, path, "p"), join(path, "p"), n);
  } else if (family == "sbm") {
    spec.family = GraphFamily::sbm;
    spec.groups = count_or(g, path, "groups", 2);
    if (spec.groups < 1 || spec.groups > n) throw ConfigError(join(path, "groups"), "must lie in [1, n]");
    spec.p_within = probability(require(g, path, "p_within"), join(path, "p_within"), n);
    spec.p_between = probability(require(g, path, "p_between"), join(path, "p_between"), n);
  } else if (family == "edge_list") {
    spec.family = GraphFamily::edge_list;
    spec.path = text(require(g, path, "path"), join(path, "path"));
    if (spec.path.is_relative() && !base_dir.empty()) spec.path = base_dir / spec.path;
  } else if (family == "planted_pair") {
    spec.family = GraphFamily::planted_pair;
    if (n % 2) throw ConfigError("environment.n", "planted_pair needs an even n");
  } else {
    throw ConfigError(join(path, "family"),
                      "unknown graph family '" + family +
                          "' (erdos_renyi, sbm, edge_list, planted_pair)");
  }
  return spec;
}

Distribution parse_distribution(const json& d, const std::string& path) {
  allow_keys(d, path, {"dist", "value", "lo", "hi", "mean", "sd", "scale"});
  const std::string kind = text(require(d, path, "dist"), join(path, "dist"));
  if (kind == "constant") return Distribution::constant(number(require(d, path, "value"), join(path, "value")));
  if (kind == "uniform") {
    const double lo = number(require(d, path, "lo"), join(path, "lo"));
    const double hi = number(require(d, path, "hi"), join(path, "hi"));
    if (hi < lo) throw ConfigError(join(path, "hi"), "must be >= lo");
    return Distribution::uniform(lo, hi);
  }
  if (kind == "normal" || kind == "normal_indexed") {
    const double sd = number(require(d, path, "sd"), join(path, "sd"));
    if (sd < 0.0) throw ConfigError(join(path, "sd"), "must be >= 0");
    if (kind == "normal") return Distribution::normal(number(require(d, path, "mean"), join(path, "mean")), sd);
    return Distribution::normal_indexed(number_or(d, path, "scale", 1.0), sd);
  }
  throw ConfigError(join(path, "dist"),
                    "unknown distribution '" + kind + "' (constant, uniform, normal, normal_indexed)");
}

ParamProtocol parse_protocol(const json& p, const std::string& path) {
  if (p.is_string()) return wrap(path, [&] { return builtin_protocol(p.get<std::string>()); });
  allow_keys(p, path, {"name", "shared", "blocks"});
  ParamProtocol proto;
  proto.name = find(p, "name") ? text(*find(p, "name"), join(path, "name")) : "custom";
  if (const json* s = find(p, "shared")) {
    if (!s->is_boolean()) throw ConfigError(join(path, "shared"), "expected true or false");
    proto.shared = s->get<bool>();
  }
  const json& blocks = require(p, path, "blocks");
  const std::string bpath = join(path, "blocks");
  if (!blocks.is_object()) throw ConfigError(bpath, "expected an object");
  for (const auto& [name, d] : blocks.items())
    proto.blocks[name] = parse_distribution(d, join(bpath, name));
  return proto;
}

OptimizerMode parse_optimizer(const json& o, const std::string& path) {
  OptimizerMode mode;
  if (o.is_string()) {
    mode.kind = wrap(path, [&] { return parse_optimizer_kind(o.get<std::string>()); });
    return mode;
  }
  allow_keys(o, path, {"kind", "max_candidates", "restarts", "max_iters"});
  if (const json* k = find(o, "kind"))
    mode.kind = wrap(join(path, "kind"), [&] { return parse_optimizer_kind(text(*k, join(path, "kind"))); });
  mode.max_candidates = count_or(o, path, "max_candidates", mode.max_candidates);
  mode.restarts = count_or(o, path, "restarts", mode.restarts);
  mode.max_iters = count_or(o, path, "max_iters", mode.max_iters);
  return mode;
}

PolicySpec parse_policy(const json& p, const std::string& path, const EnvironmentConfig& env) {
  allow_keys(p, path,
             {"label", "kind", "fit", "fit_d_max", "prior_mean", "prior_var", "noise_var", "rho",
              "sweeps", "warmup", "optimizer", "edge_order", "etc"});
  PolicySpec s;
  s.kind = wrap(join(path, "kind"),
                [&] { return parse_policy_kind(text(require(p, path, "kind"), join(path, "kind"))); });
  s.label = find(p, "label") ? text(*find(p, "label"), join(path, "label")) : std::string(to_string(s.kind));
  if (const json* f = find(p, "fit"))
    s.fit = wrap(join(path, "fit"), [&] { return parse_reward_kind(text(*f, join(path, "fit"))); });
  s.fit_d_max = count_or(p, path, "fit_d_max", 0);
  s.prior_mean = number_or(p, path, "prior_mean", 0.0);
  s.prior_var = number_or(p, path, "prior_var", 10.0);
  if (!(s.prior_var > 0.0)) throw ConfigError(join(path, "prior_var"), "must be positive");
  s.noise_var = number_or(p, path, "noise_var", env.sigma * env.sigma);
  if (!(s.noise_var > 0.0)) throw ConfigError(join(path, "noise_var"), "must be positive");
  if (const json* r = find(p, "rho")) s.rho = probability(*r, join(path, "rho"), env.n);
  if (!(s.rho > 0.0 && s.rho < 1.0)) throw ConfigError(join(path, "rho"), "must lie strictly inside (0, 1)");
  s.sweeps = count_or(p, path, "sweeps", 10);
  s.warmup = count_or(p, path, "warmup", 0);
  if (const json* o = find(p, "optimizer")) s.optimizer = parse_optimizer(*o, join(path, "optimizer"));
  if (const json* e = find(p, "edge_order")) {
    const std::string order = text(*e, join(path, "edge_order"));
    if (order == "lexicographic") s.edge_order = EdgeOrder::lexicographic;
    else if (order == "random_scan") s.edge_order = EdgeOrder::random_scan;
    else throw ConfigError(join(path, "edge_order"), "expected lexicographic or random_scan");
  }
  if (const json* e = find(p, "etc")) {
    const std::string epath = join(path, "etc");
    allow_keys(*e, epath, {"m", "delta_gamma", "threshold_rule"});
    if (const json* m = find(*e, "m")) {
      if (m->is_string() && m->get<std::string>() == "auto") s.etc.m = 0;
      else {
        s.etc.m = count(*m, join(epath, "m"));
        if (s.etc.m == 0) throw ConfigError(join(epath, "m"), "must be >= 1 or \"auto\"");
      }
    }
    s.etc.delta_gamma = number_or(*e, epath, "delta_gamma", s.etc.delta_gamma);
    if (!(s.etc.delta_gamma > 0.0)) throw ConfigError(join(epath, "delta_gamma"), "must be positive");
    if (const json* r = find(*e, "threshold_rule"))
      s.etc.rule = wrap(join(epath, "threshold_rule"),
                        [&] { return parse_threshold_rule(text(*r, join(epath, "threshold_rule"))); });
  }
  return s;
}

std::size_t parse_budget(const json& b, std::size_t n) {
  std::size_t budget;
  if (b.is_string()) {
    const std::string rule = b.get<std::string>();
    if (rule == "ceil_n_5") budget = (n + 4) / 5;
    else if (rule == "floor_n_3") budget = n / 3;
    else if (rule == "n_5") budget = n / 5;
    else throw ConfigError("budget", "expected an integer or one of ceil_n_5, floor_n_3, n_5");
  } else {
    budget = count(b, "budget");
  }
  if (budget < 1 || budget > n) throw ConfigError("budget", "must lie in [1, n]");
  return budget;
}

RunConfig parse_json(json root, const std::filesystem::path& base_dir) {
  // A single "policy" object is shorthand for a one-element "policies" array.
  if (root.is_object() && root.contains("policy")) {
    if (root.contains("policies")) throw ConfigError("policy", "give either policy or policies, not both");
    root["policies"] = json::array({root["policy"]});
    root.erase("policy");
  }
  allow_keys(root, "",
             {"name", "environment", "horizon", "budget", "policies", "replications",
              "snapshot_every", "marginal_sweeps", "causal", "output"});
  RunConfig cfg;
  cfg.name = find(root, "name") ? text(*find(root, "name"), "name") : "run";

  const json& env = require(root, "", "environment");
  allow_keys(env, "environment", {"graph", "n", "reward", "protocol", "sigma"});
  EnvironmentConfig& e = cfg.environment;
  e.sigma = number(require(env, "environment", "sigma"), "environment.sigma");
  if (!(e.sigma > 0.0)) throw ConfigError("environment.sigma", "must be positive");

  const json& graph = require(env, "environment", "graph");
  const bool from_file = graph.is_object() && graph.contains("family") && graph["family"] == "edge_list";
  if (const json* n = find(env, "n")) e.n = count(*n, "environment.n");
  if (from_file) {
    e.graph = parse_graph(graph, "environment.graph", 2, base_dir);
    try {
      e.n = load_edge_list(e.graph.path).size();
    } catch (const std::exception& ex) {
      throw ConfigError("environment.graph.path", ex.what());
    }
  } else {
    if (!find(env, "n")) throw ConfigError("environment.n", "missing required key");
    if (e.n < 2) throw ConfigError("environment.n", "must be >= 2");
    e.graph = parse_graph(graph, "environment.graph", e.n, base_dir);
  }

  const json& reward = require(env, "environment", "reward");
  allow_keys(reward, "environment.reward", {"kind", "d_max"});
  const RewardKind kind = wrap("environment.reward.kind", [&] {
    return parse_reward_kind(text(require(reward, "environment.reward", "kind"), "environment.reward.kind"));
  });
  const std::size_t d_max = count_or(reward, "environment.reward", "d_max", 4);
  e.reward = wrap("environment.reward", [&] { return make_spec(kind, e.n, d_max); });

  e.protocol = parse_protocol(require(env, "environment", "protocol"), "environment.protocol");
  {
    std::set<std::string> want, have;
    for (const auto& b : theta_blocks(e.reward)) want.insert(b.name);
    for (const auto& [name, d] : e.protocol.blocks) have.insert(name);
    if (want != have) {
      std::string need;
      for (const auto& w : want) need += " " + w;
      throw ConfigError("environment.protocol", "protocol '" + e.protocol.name +
                                                    "' does not match reward kind " +
                                                    std::string(to_string(kind)) + " (needs:" + need + ")");
    }
  }

  cfg.horizon = count(require(root, "", "horizon"), "horizon");
  if (cfg.horizon < 1) throw ConfigError("horizon", "must be >= 1");
  cfg.budget = parse_budget(require(root, "", "budget"), e.n);

  const json& pols = require(root, "", "policies");
  if (!pols.is_array() || pols.empty()) throw ConfigError("policies", "expected a non-empty array");
  std::set<std::string> labels;
  Environment probe{e.reward, Eigen::VectorXd(), Adjacency(e.n), e.sigma};
  for (std::size_t i = 0; i < pols.size(); ++i) {
    const std::string path = "policies[" + std::to_string(i) + "]";
    PolicySpec p = parse_policy(pols[i], path, e);
    if (!labels.insert(p.label).second) throw ConfigError(path + ".label", "duplicate label '" + p.label + "'");
    const RewardSpec fit = wrap(path + ".fit", [&] { return fit_spec(p, probe); });
    if (p.optimizer.kind == OptimizerKind::top_b && !is_collapsible(fit.kind))
      throw ConfigError(path + ".optimizer", "top_b requires a collapsible fit kind");
    if (p.kind == PolicyKind::etc_ts) {
      const std::size_t m = resolved_etc_m(p, probe, cfg.horizon);
      if (e.n * m > cfg.horizon)
        throw ConfigError(path + ".etc.m", "phase 1 needs n*m = " + std::to_string(e.n * m) +
                                               " rounds, more than the horizon");
    }
    cfg.policies.push_back(std::move(p));
  }

  if (const json* r = find(root, "replications")) {
    allow_keys(*r, "replications", {"count", "base_seed", "matched_seeds"});
    cfg.replications.count = count_or(*r, "replications", "count", 1);
    if (cfg.replications.count < 1) throw ConfigError("replications.count", "must be >= 1");
    cfg.replications.base_seed = count_or(*r, "replications", "base_seed", 1000);
    if (const json* m = find(*r, "matched_seeds")) {
      if (!m->is_boolean()) throw ConfigError("replications.matched_seeds", "expected true or false");
      cfg.replications.matched_seeds = m->get<bool>();
    }
  }
  cfg.snapshot_every = count_or(root, "", "snapshot_every", 100);
  if (cfg.snapshot_every < 1) throw ConfigError("snapshot_every", "must be >= 1");
  cfg.marginal_sweeps = count_or(root, "", "marginal_sweeps", 50);

  if (const json* c = find(root, "causal")) {
    allow_keys(*c, "causal", {"eval_horizon", "treat_prob", "ridge_lambda", "threshold"});
    cfg.causal.eval_horizon = count_or(*c, "causal", "eval_horizon", 2000);
    if (cfg.causal.eval_horizon < 1) throw ConfigError("causal.eval_horizon", "must be >= 1");
    if (const json* t = find(*c, "treat_prob")) {
      if (t->is_string() && t->get<std::string>() == "B/n") cfg.causal.treat_prob = 0.0;
      else cfg.causal.treat_prob = probability(*t, "causal.treat_prob", e.n);
    }
    cfg.causal.ridge_lambda = number_or(*c, "causal", "ridge_lambda", 0.01);
    if (!(cfg.causal.ridge_lambda > 0.0)) throw ConfigError("causal.ridge_lambda", "must be positive");
    cfg.causal.threshold = number_or(*c, "causal", "threshold", 0.5);
    if (!(cfg.causal.threshold > 0.0 && cfg.causal.threshold < 1.0))
      throw ConfigError("causal.threshold", "must lie strictly inside (0, 1)");
  }
  if (const json* o = find(root, "output")) cfg.output = text(*o, "output");

  if (from_file) root["environment"]["graph"]["path"] = e.graph.path.string();
  cfg.source = root.dump(2);
  return cfg;
}

json parse_text(std::string_view text_in, const std::string& origin) {
  try {
    return json::parse(text_in.begin(), text_in.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("<syntax>", origin + ": " + e.what());
  }
}

std::vector<std::string> split_path(std::string_view axis) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : axis) {
    if (c == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

void assign(json& node, const std::vector<std::string>& parts, std::size_t at, const json& value,
            const std::string& axis) {
  const std::string& key = parts[at];
  if (key == "*") {
    if (!node.is_array()) throw ConfigError(axis, "'*' must address an array");
    for (auto& el : node) assign(el, parts, at + 1, value, axis);
    return;
  }
  if (!node.is_object()) throw ConfigError(axis, "path does not address an object");
  if (at + 1 == parts.size()) {
    node[key] = value;
    return;
  }
  if (!node.contains(key)) node[key] = json::object();
  assign(node[key], parts, at + 1, value, axis);
}

}  // namespace

std::string canonical_axis(std::string_view axis) {
  if (axis == "rho" || axis == "policy.rho") return "policies.*.rho";
  if (axis == "K" || axis == "sweeps" || axis == "policy.sweeps") return "policies.*.sweeps";
  if (axis == "m" || axis == "policy.etc.m") return "policies.*.etc.m";
  if (axis == "sigma") return "environment.sigma";
  if (axis == "T") return "horizon";
  if (axis == "B") return "budget";
  return std::string(axis);
}

RunConfig parse_config(std::string_view json_text) {
  return parse_json(parse_text(json_text, "config"), {});
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_json(parse_text(ss.str(), path.string()), path.parent_path());
  if (cfg.name == "run") cfg.name = path.stem().string();
  return cfg;
}

RunConfig with_override(const RunConfig& cfg, std::string_view axis, std::string_view value) {
  const std::string canon = canonical_axis(axis);
  json root = json::parse(cfg.source);
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = std::string(value);
  }
  const auto parts = split_path(canon);
  for (const auto& p : parts)
    if (p.empty()) throw ConfigError(std::string(axis), "malformed sweep axis");
  if (parts.size() == 1 && !root.contains(parts[0]))
    throw ConfigError(std::string(axis), "unknown sweep axis");
  assign(root, parts, 0, v, std::string(axis));
  RunConfig out = parse_json(std::move(root), {});
  out.name = cfg.name;
  return out;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  Fnv1a h;
  h.update(cfg.source);
  return h.digest();
}

std::string config_schema() {
  return R"(Config schema (JSON; comments allowed). Keys marked * are required.

name                      string, run name (default: file stem)
environment*
  n*                      integer >= 2 (inferred for edge_list graphs)
  sigma*                  noise standard deviation > 0
  graph*
    family*               erdos_renyi | sbm | edge_list | planted_pair
    p                     erdos_renyi edge probability, number or "1/n"
    groups                sbm block count (default 2); contiguous blocks, remainder in the last
    p_within, p_between   sbm probabilities, number or "1/n"
    path                  edge_list file, relative to the config file
  reward*
    kind*                 linear_in_means_per_node (alias linear_in_means) | count_based_shared |
                          count_based_per_node | pairwise_nia | additive_pairs |
                          saturation_spec_a | interaction_spec_b | paired_indicator
    d_max                 count-based bucket cap (default 4)
  protocol*               built-in name, or {"name", "shared": bool, "blocks": {block: dist}}
                          dist: {"dist": "constant", "value"} | {"dist": "uniform", "lo", "hi"} |
                                {"dist": "normal", "mean", "sd"} |
                                {"dist": "normal_indexed", "scale", "sd"}  (bucket k ~ N(scale k, sd^2))
                          built-ins: head_to_head_small_xi, head_to_head_large_xi, additive, spec_a,
                                     spec_b, village, count_based, linear_means_shared, paired
horizon*                  T >= 1
budget*                   integer in [1, n] or ceil_n_5 | floor_n_3 | n_5
policies*                 array of policy objects ("policy": {...} is accepted for one)
  kind*                   gibbs_ts | etc_ts | known_a_ts | no_interference_ts | uniform_random
  label                   unique output label (default: kind)
  fit                     reward kind the policy fits (default: environment kind)
  fit_d_max               d_max of a count-based fit (default: environment d_max, else 4)
  prior_mean              mu0 entry (default 0)
  prior_var               Sigma0 = prior_var I (default 10)
  noise_var               sigma^2 assumed by the likelihood (default: environment sigma^2)
  rho                     edge prior in (0, 1), number or "1/n" (default 0.3)
  sweeps                  Gibbs sweeps K per round (default 10)
  warmup                  random size-B rounds before sampling (default 0)
  optimizer               auto | exact_enumeration | top_b | swap_local_search, or
                          {"kind", "max_candidates" (1e6), "restarts" (20), "max_iters" (200)}
  edge_order              lexicographic (default) | random_scan
  etc                     {"m": integer or "auto" (default auto), "delta_gamma" (0.3),
                           "threshold_rule": theorem | adaptive}
replications
  count                   replications (default 1)
  base_seed               rep seed = base_seed + 1000 rep (default 1000)
  matched_seeds           reuse rep seeds across sweep cells (default true)
snapshot_every            recovery-metric cadence in rounds (default 100)
marginal_sweeps           extra sweeps for final edge marginals (default 50)
causal
  eval_horizon            randomized inference-phase rounds (default 2000)
  treat_prob              Bernoulli treatment rate, number or "B/n" (default B/n)
  ridge_lambda            ridge fallback strength (default 0.01)
  threshold               edge-marginal threshold for the graph estimate (default 0.5)
output                    output directory (default "out")

Sweep axes: any dotted key path; aliases rho, K, m apply to every policy, sigma, T, B.
)";
}

}  // namespace interfere
