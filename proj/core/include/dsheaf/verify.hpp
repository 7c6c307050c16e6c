#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dsheaf/graph.hpp"
#include "dsheaf/random.hpp"
#include "dsheaf/sheaf.hpp"

namespace dsheaf {

enum class GraphShape { Mixed, Directed, Undirected };

/// Erdős–Rényi style graph on n nodes with edge probability p. Each edge is
/// Directed with probability `directed_share` (forced by Directed/Undirected
/// shapes) and randomly oriented. Nodes in the first `isolated` positions of a
/// random permutation receive no edges.
DirectedGraph random_graph(Rng& rng, std::size_t n, double p, GraphShape shape, double directed_share = 0.5,
                           std::size_t isolated = 0);

inline constexpr double kPhaseGrid[] = {0.0, 0.1, 0.25, 0.5, 1.0};

/// Random mixed-graph sheaf: n ≤ max_nodes, d ∈ {1..4}, q from the phase grid
/// (cycled by `index`), map class cycled by `index`, isolated nodes in about a
/// third of the instances.
DirectedCellularSheaf random_instance(Rng& rng, std::size_t index, std::size_t max_nodes = 50);

struct SuiteResult {
  std::string name;
  std::size_t passed = 0;
  std::size_t total = 0;
  double worst = 0.0;      // largest defect seen
  double tolerance = 0.0;  // threshold the defect is compared to
  [[nodiscard]] bool ok() const { return passed == total; }
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::size_t trials = 100;
  std::size_t max_nodes = 50;
  /// Mutation switch: builds every sheaf with −q, which conjugates its phases
  /// while the reference operators keep +q.
  bool flip_phase_sign = false;
};

/// Runs the Laplacian property suites over `trials` random instances.
std::vector<SuiteResult> run_sheaf_suites(const VerifyOptions& options);

}  // namespace dsheaf
