#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "dsheaf/graph.hpp"
#include "dsheaf/linalg.hpp"
#include "dsheaf/random.hpp"

namespace dsheaf {

enum class MapClass { Diagonal, Orthogonal, General };

struct SheafConfig {
  std::size_t d = 1;
  double q = 0.0;
  MapClass map_class = MapClass::General;
};

/// exp(i·2πq·(a_uv − a_vu)). Exactly 1 when a_uv == a_vu.
cplx phase(double q, int a_uv, int a_vu);

/// (first, second) endpoints of an edge: (u, v) for a Directed edge u → v and
/// (min, max) for an Undirected one. The first endpoint carries the + sign in
/// the coboundary and the second the − sign (and, if directed, the phase).
std::pair<std::size_t, std::size_t> oriented(const Edge& e);

/// Real base restriction maps of one edge, keyed by endpoint role.
struct EdgeMaps {
  RealMatrix first;
  RealMatrix second;
};

class DirectedCellularSheaf {
public:
  /// Throws std::invalid_argument unless there is one EdgeMaps per edge and
  /// every map is d×d.
  DirectedCellularSheaf(DirectedGraph graph, SheafConfig config, std::vector<EdgeMaps> base_maps);

  [[nodiscard]] const DirectedGraph& graph() const { return graph_; }
  [[nodiscard]] const SheafConfig& config() const { return config_; }
  [[nodiscard]] std::size_t stalk_dim() const { return config_.d; }
  [[nodiscard]] const std::vector<EdgeMaps>& base_maps() const { return maps_; }

  /// Base map F⁰ of `node` on edge e.
  [[nodiscard]] const RealMatrix& base_map(std::size_t e, std::size_t node) const;

  /// Phase carried by the second endpoint of edge e: T_{uv} for a directed
  /// u → v, 1 for an undirected edge.
  [[nodiscard]] cplx edge_phase(std::size_t e) const;

  /// Restriction maps with the phase applied.
  [[nodiscard]] ComplexMatrix effective_first(std::size_t e) const;
  [[nodiscard]] ComplexMatrix effective_second(std::size_t e) const;
  [[nodiscard]] ComplexMatrix effective_map(std::size_t e, std::size_t node) const;

private:
  DirectedGraph graph_;
  SheafConfig config_;
  std::vector<EdgeMaps> maps_;
};

/// d = 1, all base maps equal to [1].
DirectedCellularSheaf trivial_sheaf(const DirectedGraph& graph, double q);

/// (I − S)(I + S)^{-1} with S skew-symmetric, S_ij = params[k] for the k-th
/// pair i < j in row-major order. Needs d(d−1)/2 parameters.
RealMatrix cayley_orthogonal(std::span<const double> params, std::size_t d);

/// Base maps drawn per map class: Diagonal entries uniform in ±1.5,
/// Orthogonal via Cayley of a standard-normal skew matrix, General
/// standard-normal entries.
RealMatrix random_map(Rng& rng, std::size_t d, MapClass map_class);
DirectedCellularSheaf random_sheaf(const DirectedGraph& graph, SheafConfig config, Rng& rng);

/// Block coboundary, m block-rows × n block-cols. Row e holds +F_first in the
/// first endpoint's column and −F_second in the second's. `flip_undirected`,
/// when non-empty, negates the rows of the flagged undirected edges (the
/// opposite arbitrary orientation).
BlockMatrix coboundary(const DirectedCellularSheaf& sheaf, const std::vector<bool>& flip_undirected = {});

/// δ*δ.
BlockMatrix laplacian_from_coboundary(const BlockMatrix& delta);

/// Direct per-block assembly: off-diagonal (u, v) = −F*_{u⊴e} F_{v⊴e},
/// diagonal (u, u) = Σ_{e∈Γ(u)} F*_{u⊴e} F_{u⊴e}.
BlockMatrix laplacian_blocks(const DirectedCellularSheaf& sheaf);

/// D_u = Σ_{e∈Γ(u)} F*_{u⊴e} F_{u⊴e}; zero for isolated nodes.
std::vector<ComplexMatrix> degree_blocks(const DirectedCellularSheaf& sheaf);

/// Block (u, v) ↦ D_u^{-1/2} L_uv D_v^{-1/2} with pseudo-inverse roots.
BlockMatrix normalize(const BlockMatrix& laplacian, const std::vector<ComplexMatrix>& degrees,
                      double clamp = kDefaultClamp);
BlockMatrix normalized_laplacian(const DirectedCellularSheaf& sheaf, double clamp = kDefaultClamp);

/// Applies the Laplacian to a 0-cochain edge by edge, split into inflow,
/// outflow and undirected contributions. x is n·d × k.
ComplexMatrix apply_laplacian_flows(const DirectedCellularSheaf& sheaf, const ComplexMatrix& x);

// ---------------------------------------------------------------------------
// Reference operators. These read the adjacency matrix directly and do not go
// through phase() or the sheaf assembly.

/// Real classical sheaf Laplacian δᵀδ of the undirected version of the graph
/// using the sheaf's base maps (phases ignored). Dense nd × nd.
RealMatrix classical_sheaf_laplacian(const DirectedCellularSheaf& sheaf);

/// D_s − A_s ⊙ exp(i2πq(A − Aᵀ)); normalized: I − D_s^{-1/2} H D_s^{-1/2}
/// with zero-degree entries of D_s^{-1/2} set to 0.
ComplexMatrix magnetic_laplacian(const DirectedGraph& graph, double q, bool normalized = false);

/// D̄_s − A_s ⊙ (1 − sgn|A − Aᵀ| + i·sgn(|A| − |Aᵀ|)).
ComplexMatrix sign_magnetic_laplacian(const DirectedGraph& graph);

/// n × m: column e has 1 at (u, e) for e = (u, v) or e = {u, v} with u < v,
/// −1 for e = {u, v} with u > v, and −T_{uv} for e = (v, u).
ComplexMatrix complex_incidence(const DirectedGraph& graph, double q);

struct SpectralReport {
  double hermiticity_defect = 0.0;
  double min_eig = 0.0;
  double max_eig = 0.0;
};

inline constexpr std::size_t kDenseEigenCap = 2000;

/// Throws std::length_error when n·d exceeds `cap`.
SpectralReport spectral_report(const BlockMatrix& laplacian, std::size_t cap = kDenseEigenCap);
SpectralReport spectral_report(const ComplexMatrix& dense, std::size_t cap = kDenseEigenCap);

}  // namespace dsheaf
