#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "dsheaf/linalg.hpp"

namespace dsheaf {

enum class EdgeKind : std::uint8_t { Undirected = 0, Directed = 1 };

/// For Directed edges the orientation is u → v. Undirected edges keep the
/// order they were given in; consumers that need an orientation use
/// (min, max).
struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  EdgeKind kind = EdgeKind::Directed;

  bool operator==(const Edge&) const = default;
};

/// Mixed graph with at most one edge per unordered node pair. The position of
/// an edge in `edges()` is its edge index.
class DirectedGraph {
public:
  DirectedGraph() = default;
  /// Throws std::invalid_argument on self-loops, out-of-range endpoints or a
  /// second edge on the same unordered pair.
  DirectedGraph(std::size_t n, std::vector<Edge> edges);

  [[nodiscard]] std::size_t num_nodes() const { return n_; }
  [[nodiscard]] std::size_t num_edges() const { return edges_.size(); }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] const Edge& edge(std::size_t e) const { return edges_.at(e); }

  /// Edge indices incident to u, ascending.
  [[nodiscard]] std::vector<std::size_t> incident(std::size_t u) const;

  [[nodiscard]] bool is_directed() const;    // every edge Directed
  [[nodiscard]] bool is_undirected() const;  // every edge Undirected

  /// Same edges, all made Undirected.
  [[nodiscard]] DirectedGraph undirected_version() const;
  /// Node u becomes perm[u]; edge order is preserved.
  [[nodiscard]] DirectedGraph relabeled(const std::vector<std::size_t>& perm) const;

  bool operator==(const DirectedGraph&) const = default;

private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
};

class AdjacencyMatrix {
public:
  explicit AdjacencyMatrix(std::size_t n) : n_(n), entries_(n * n, 0) {}

  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] std::uint8_t operator()(std::size_t u, std::size_t v) const { return entries_[u * n_ + v]; }
  void set(std::size_t u, std::size_t v) { entries_[u * n_ + v] = 1; }
  [[nodiscard]] RealMatrix to_real() const;

  bool operator==(const AdjacencyMatrix&) const = default;

private:
  std::size_t n_;
  std::vector<std::uint8_t> entries_;
};

AdjacencyMatrix adjacency(const DirectedGraph& graph);

/// (in-degree + out-degree) per node; an Undirected edge counts once in each.
RealMatrix degree_features(const DirectedGraph& graph);

// ---------------------------------------------------------------------------
// Directed stochastic block model

struct DsbmParams {
  std::size_t n = 0;
  std::size_t communities = 1;
  RealMatrix alpha;  // C×C, symmetric: edge probability between communities
  RealMatrix beta;   // C×C, β_ij + β_ji = 1: probability of orienting C_i → C_j
  std::uint64_t seed = 0;

  /// α_ii = alpha_intra, α_ij = alpha_inter, β_ij = beta for i < j.
  static DsbmParams uniform(std::size_t n, std::size_t communities, double alpha_intra, double alpha_inter,
                            double beta, std::uint64_t seed);

  /// Throws std::invalid_argument when the invariants do not hold.
  void validate() const;

  [[nodiscard]] std::size_t community_of(std::size_t u) const { return u / (n / communities); }
};

/// Nodes are split into contiguous equal blocks; every sampled edge is Directed.
DirectedGraph dsbm_generate(const DsbmParams& params);
std::vector<int> dsbm_labels(const DsbmParams& params);

// ---------------------------------------------------------------------------
// Datasets and splits

struct SplitMasks {
  std::vector<bool> train;
  std::vector<bool> val;
  std::vector<bool> test;
};

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

/// Per group (each label when per_class, else all nodes) the counts are
/// ⌊fraction·size⌋, with leftover nodes going to train and then val. Nodes are
/// drawn in a seeded random order.
SplitMasks make_splits(const std::vector<int>& labels, SplitFractions fractions, bool per_class, std::uint64_t seed);

struct Dataset {
  DirectedGraph graph;
  RealMatrix features;  // n × f0
  std::vector<int> labels;
  SplitMasks masks;

  [[nodiscard]] std::size_t num_classes() const;
  /// Checks shapes, label range, mask disjointness and train coverage of every class.
  void validate() const;
};

// ---------------------------------------------------------------------------
// File formats

class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct EdgeListRead {
  DirectedGraph graph;
  std::size_t merged_digons = 0;
};

/// Text format: node count, then one "u v k" line per edge (k = 1 directed
/// u→v, k = 0 undirected). '#' lines are comments. Reciprocal directed pairs
/// are merged into one Undirected edge at the position of the first arc.
EdgeListRead read_edge_list(std::istream& in);
void write_edge_list(std::ostream& out, const DirectedGraph& graph);

DirectedGraph load_edge_list(const std::filesystem::path& path);
void save_edge_list(const std::filesystem::path& path, const DirectedGraph& graph);

/// CSV without header. Throws FormatError when expected_rows is set and differs.
RealMatrix read_features(std::istream& in, std::size_t expected_rows = 0);
void write_features(std::ostream& out, const RealMatrix& features);
RealMatrix load_features(const std::filesystem::path& path, std::size_t expected_rows = 0);
void save_features(const std::filesystem::path& path, const RealMatrix& features);

std::vector<int> read_labels(std::istream& in, std::size_t expected_rows = 0);
void write_labels(std::ostream& out, const std::vector<int>& labels);
std::vector<int> load_labels(const std::filesystem::path& path, std::size_t expected_rows = 0);
void save_labels(const std::filesystem::path& path, const std::vector<int>& labels);

}  // namespace dsheaf
