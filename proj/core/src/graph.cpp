#include "interfere/graph.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "interfere/errors.hpp"
#include "interfere/rng.hpp"

namespace interfere {

Adjacency::Adjacency(std::size_t n) : n_(n), dense_(n * n, 0), nbrs_(n) {}

Adjacency Adjacency::from_edges(std::size_t n, std::span<const Edge> edges) {
  Adjacency g(n);
  for (const auto& [i, j] : edges) g.set_edge(i, j, true);
  return g;
}

Adjacency Adjacency::complete(std::size_t n) {
  Adjacency g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) g.set_edge(i, j, true);
  return g;
}

bool Adjacency::set_edge(std::size_t i, std::size_t j, bool value) {
  if (i >= n_ || j >= n_) throw ParameterError("set_edge: node out of range");
  if (i == j) throw ParameterError("set_edge: self-loops are not allowed");
  const std::uint8_t v = value ? 1 : 0;
  if (dense_[i * n_ + j] == v) return false;
  dense_[i * n_ + j] = v;
  dense_[j * n_ + i] = v;
  auto link = [&](std::size_t a, std::size_t b) {
    auto& list = nbrs_[a];
    auto it = std::lower_bound(list.begin(), list.end(), b);
    if (value)
      list.insert(it, b);
    else
      list.erase(it);
  };
  link(i, j);
  link(j, i);
  if (value)
    ++edge_count_;
  else
    --edge_count_;
  return true;
}

std::vector<Edge> Adjacency::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j : nbrs_[i])
      if (j > i) out.emplace_back(i, j);
  return out;
}

bool Adjacency::valid() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    if (dense_[i * n_ + i] != 0) return false;
    std::size_t deg = 0;
    for (std::size_t j = 0; j < n_; ++j) {
      if (dense_[i * n_ + j] != dense_[j * n_ + i]) return false;
      if (dense_[i * n_ + j] > 1) return false;
      if (dense_[i * n_ + j]) {
        ++deg;
        if (j > i) ++count;
      }
    }
    if (deg != nbrs_[i].size()) return false;
    if (!std::is_sorted(nbrs_[i].begin(), nbrs_[i].end())) return false;
    for (std::size_t j : nbrs_[i])
      if (!dense_[i * n_ + j]) return false;
  }
  return count == edge_count_;
}

namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ParameterError(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

std::vector<std::size_t> sbm_blocks(std::size_t n, std::size_t groups) {
  if (groups == 0 || groups > n)
    throw ParameterError("sbm: groups must be in [1, n]");
  const std::size_t size = n / groups;
  std::vector<std::size_t> block(n);
  for (std::size_t v = 0; v < n; ++v) block[v] = std::min(v / size, groups - 1);
  return block;
}

Adjacency generate(const GraphGenSpec& spec, std::size_t n) {
  if (n < 2) throw ParameterError("generate: need at least 2 nodes");
  Rng rng(spec.seed);
  switch (spec.family) {
    case GraphFamily::erdos_renyi: {
      check_probability(spec.p, "erdos_renyi p");
      Adjacency g(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (bernoulli(rng, spec.p)) g.set_edge(i, j, true);
      return g;
    }
    case GraphFamily::sbm: {
      check_probability(spec.p_within, "sbm p_within");
      check_probability(spec.p_between, "sbm p_between");
      const auto block = sbm_blocks(n, spec.groups);
      Adjacency g(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          const double p = block[i] == block[j] ? spec.p_within : spec.p_between;
          if (bernoulli(rng, p)) g.set_edge(i, j, true);
        }
      return g;
    }
    case GraphFamily::planted_pair: {
      if (n % 2 != 0) throw ParameterError("planted_pair: n must be even");
      const std::size_t pairs = n / 2;
      const auto k = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(pairs));
      Adjacency g(n);
      g.set_edge(2 * k, 2 * k + 1, true);
      return g;
    }
    case GraphFamily::edge_list: {
      Adjacency g = load_edge_list(spec.path);
      if (g.size() != n)
        throw ParameterError("generate: edge list has " + std::to_string(g.size()) +
                             " nodes, expected " + std::to_string(n));
      return g;
    }
  }
  throw ParameterError("generate: unknown graph family");
}

Adjacency read_edge_list(std::istream& in) {
  std::set<std::pair<long long, long long>> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    long long a = 0, b = 0;
    std::string extra;
    if (!(fields >> a >> b) || (fields >> extra) || a < 0 || b < 0)
      throw ParseError("edge list line " + std::to_string(lineno) +
                       ": expected two non-negative node ids");
    if (a == b) continue;
    pairs.emplace(std::min(a, b), std::max(a, b));
  }
  if (in.bad()) throw IoError("edge list: read failure");

  std::map<long long, std::size_t> label;
  for (const auto& [a, b] : pairs) {
    label.emplace(a, 0);
    label.emplace(b, 0);
  }
  if (label.size() < 2)
    throw ParameterError("edge list: fewer than 2 non-isolated nodes");
  std::size_t next = 0;
  for (auto& [id, idx] : label) idx = next++;

  Adjacency g(label.size());
  for (const auto& [a, b] : pairs) g.set_edge(label[a], label[b], true);
  return g;
}

Adjacency load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list " + path.string());
  return read_edge_list(in);
}

void write_edge_list(const Adjacency& g, std::ostream& out) {
  for (const auto& [i, j] : g.edges()) out << i << ' ' << j << '\n';
}

void save_edge_list(const Adjacency& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_edge_list(g, out);
}

namespace {

void check_same_size(const Adjacency& a, const Adjacency& b) {
  if (a.size() != b.size()) throw ParameterError("graph size mismatch");
}

}  // namespace

double edge_f1(const Adjacency& estimate, const Adjacency& truth) {
  check_same_size(estimate, truth);
  const std::size_t n = truth.size();
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool e = estimate.has_edge(i, j), t = truth.has_edge(i, j);
      tp += e && t;
      fp += e && !t;
      fn += !e && t;
    }
  if (estimate.edge_count() == 0 && truth.edge_count() == 0) return 1.0;
  if (tp == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

double edge_accuracy(const Adjacency& estimate, const Adjacency& truth) {
  check_same_size(estimate, truth);
  const std::size_t n = truth.size();
  if (n < 2) return 1.0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      agree += estimate.has_edge(i, j) == truth.has_edge(i, j);
  return static_cast<double>(agree) / static_cast<double>(n * (n - 1) / 2);
}

std::vector<std::size_t> degrees(const Adjacency& g) {
  std::vector<std::size_t> d(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) d[i] = g.degree(i);
  return d;
}

}  // namespace interfere
