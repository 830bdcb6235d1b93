#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace interfere {

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected simple graph on nodes 0..n-1. Symmetry and an empty diagonal
/// hold by construction; every mutation goes through set_edge.
///
/// Keeps a dense byte matrix for O(1) lookups and sorted neighbor lists so
/// that neighborhood scans cost O(deg).
class Adjacency {
 public:
  Adjacency() = default;
  explicit Adjacency(std::size_t n);

  static Adjacency from_edges(std::size_t n, std::span<const Edge> edges);
  static Adjacency complete(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edge_count_; }

  bool has_edge(std::size_t i, std::size_t j) const {
    return dense_[i * n_ + j] != 0;
  }

  /// Sets A_ij = A_ji = value. Returns true when the entry changed.
  /// Throws ParameterError for i == j or out-of-range nodes.
  bool set_edge(std::size_t i, std::size_t j, bool value);

  std::span<const std::size_t> neighbors(std::size_t i) const {
    return nbrs_[i];
  }
  std::size_t degree(std::size_t i) const noexcept { return nbrs_[i].size(); }

  /// Upper-triangle edge list (i < j) in lexicographic order.
  std::vector<Edge> edges() const;

  /// Checks symmetry, zero diagonal and consistency of the neighbor lists.
  bool valid() const;

  friend bool operator==(const Adjacency& a, const Adjacency& b) {
    return a.n_ == b.n_ && a.dense_ == b.dense_;
  }

  const std::vector<std::uint8_t>& dense() const noexcept { return dense_; }

 private:
  std::size_t n_ = 0;
  std::size_t edge_count_ = 0;
  std::vector<std::uint8_t> dense_;
  std::vector<std::vector<std::size_t>> nbrs_;
};

enum class GraphFamily { erdos_renyi, sbm, edge_list, planted_pair };

/// Recipe for a random (or loaded) graph.
struct GraphGenSpec {
  GraphFamily family = GraphFamily::erdos_renyi;
  double p = 0.0;            // erdos_renyi
  std::size_t groups = 2;    // sbm
  double p_within = 0.0;     // sbm
  double p_between = 0.0;    // sbm
  std::filesystem::path path;  // edge_list
  std::uint64_t seed = 0;
};

/// Draws a graph from `spec` on n nodes. Deterministic given spec.seed.
/// SBM blocks are contiguous, of size floor(n / groups), with the remainder
/// in the last block. planted_pair connects exactly one of the n/2 disjoint
/// pairs (2k, 2k+1), chosen uniformly; n must be even.
Adjacency generate(const GraphGenSpec& spec, std::size_t n);

/// SBM block of each node under the contiguous assignment.
std::vector<std::size_t> sbm_blocks(std::size_t n, std::size_t groups);

/// Reads whitespace-separated node-id pairs, one edge per line. Blank lines
/// and lines starting with '#' are skipped. Edges are OR-symmetrized,
/// self-loops and duplicates dropped, isolated ids dropped, and survivors
/// relabelled 0..n-1 in ascending id order.
Adjacency load_edge_list(const std::filesystem::path& path);
Adjacency read_edge_list(std::istream& in);

/// Writes "i j" per upper-triangle edge. Output of a loaded graph reloads
/// to an identical Adjacency.
void write_edge_list(const Adjacency& g, std::ostream& out);
void save_edge_list(const Adjacency& g, const std::filesystem::path& path);

/// F1 over upper-triangle entries with "edge present" as the positive class.
/// 1 when both graphs are empty, 0 when exactly one is.
double edge_f1(const Adjacency& estimate, const Adjacency& truth);

/// Fraction of upper-triangle entries on which the graphs agree.
double edge_accuracy(const Adjacency& estimate, const Adjacency& truth);

std::vector<std::size_t> degrees(const Adjacency& g);

inline double density(const Adjacency& g) {
  const double n = static_cast<double>(g.size());
  return n < 2 ? 0.0 : static_cast<double>(g.edge_count()) / (n * (n - 1) / 2);
}

}  // namespace interfere
