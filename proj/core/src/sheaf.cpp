#include "dsheaf/sheaf.hpp"

#include <algorithm>
#include <numbers>
#include <string>

namespace dsheaf {

cplx phase(double q, int a_uv, int a_vu) {
  if (a_uv == a_vu) return {1.0, 0.0};
  return std::polar(1.0, 2.0 * std::numbers::pi * q * static_cast<double>(a_uv - a_vu));
}

std::pair<std::size_t, std::size_t> oriented(const Edge& e) {
  if (e.kind == EdgeKind::Directed) return {e.u, e.v};
  return {std::min(e.u, e.v), std::max(e.u, e.v)};
}

DirectedCellularSheaf::DirectedCellularSheaf(DirectedGraph graph, SheafConfig config, std::vector<EdgeMaps> base_maps)
    : graph_(std::move(graph)), config_(config), maps_(std::move(base_maps)) {
  if (config_.d == 0) throw std::invalid_argument("DirectedCellularSheaf: stalk dimension must be positive");
  if (maps_.size() != graph_.num_edges()) {
    throw std::invalid_argument("DirectedCellularSheaf: expected one pair of base maps per edge");
  }
  for (std::size_t e = 0; e < maps_.size(); ++e) {
    for (const RealMatrix* m : {&maps_[e].first, &maps_[e].second}) {
      if (m->rows() != config_.d || m->cols() != config_.d) {
        throw std::invalid_argument("DirectedCellularSheaf: base map of edge " + std::to_string(e) + " is not d×d");
      }
    }
  }
}

const RealMatrix& DirectedCellularSheaf::base_map(std::size_t e, std::size_t node) const {
  const auto [first, second] = oriented(graph_.edge(e));
  if (node == first) return maps_[e].first;
  if (node == second) return maps_[e].second;
  throw std::invalid_argument("base_map: node is not an endpoint of the edge");
}

cplx DirectedCellularSheaf::edge_phase(std::size_t e) const {
  // A directed edge u → v has A_uv = 1, A_vu = 0; undirected ones have both 1.
  return graph_.edge(e).kind == EdgeKind::Directed ? phase(config_.q, 1, 0) : phase(config_.q, 1, 1);
}

ComplexMatrix DirectedCellularSheaf::effective_first(std::size_t e) const { return to_complex(maps_.at(e).first); }

ComplexMatrix DirectedCellularSheaf::effective_second(std::size_t e) const {
  return to_complex(maps_.at(e).second) * edge_phase(e);
}

ComplexMatrix DirectedCellularSheaf::effective_map(std::size_t e, std::size_t node) const {
  const auto [first, second] = oriented(graph_.edge(e));
  if (node == first) return effective_first(e);
  if (node == second) return effective_second(e);
  throw std::invalid_argument("effective_map: node is not an endpoint of the edge");
}

DirectedCellularSheaf trivial_sheaf(const DirectedGraph& graph, double q) {
  std::vector<EdgeMaps> maps(graph.num_edges(), EdgeMaps{RealMatrix{{1.0}}, RealMatrix{{1.0}}});
  return {graph, SheafConfig{1, q, MapClass::Diagonal}, std::move(maps)};
}

RealMatrix cayley_orthogonal(std::span<const double> params, std::size_t d) {
  if (params.size() != d * (d - 1) / 2) throw std::invalid_argument("cayley_orthogonal: expected d(d-1)/2 parameters");
  RealMatrix s(d, d);
  std::size_t k = 0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      s(i, j) = params[k];
      s(j, i) = -params[k];
      ++k;
    }
  }
  const RealMatrix eye = RealMatrix::identity(d);
  return matmul(eye - s, inverse(eye + s));
}

RealMatrix random_map(Rng& rng, std::size_t d, MapClass map_class) {
  RealMatrix m(d, d);
  switch (map_class) {
    case MapClass::Diagonal:
      for (std::size_t i = 0; i < d; ++i) m(i, i) = rng.uniform(-1.5, 1.5);
      break;
    case MapClass::Orthogonal: {
      std::vector<double> params(d * (d - 1) / 2);
      for (auto& p : params) p = rng.normal();
      m = cayley_orthogonal(params, d);
      break;
    }
    case MapClass::General:
      for (auto& v : m.data()) v = rng.normal();
      break;
  }
  return m;
}

DirectedCellularSheaf random_sheaf(const DirectedGraph& graph, SheafConfig config, Rng& rng) {
  std::vector<EdgeMaps> maps;
  maps.reserve(graph.num_edges());
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    RealMatrix first = random_map(rng, config.d, config.map_class);
    RealMatrix second = random_map(rng, config.d, config.map_class);
    maps.push_back({std::move(first), std::move(second)});
  }
  return {graph, config, std::move(maps)};
}

// ---------------------------------------------------------------------------

BlockMatrix coboundary(const DirectedCellularSheaf& sheaf, const std::vector<bool>& flip_undirected) {
  const auto& g = sheaf.graph();
  if (!flip_undirected.empty() && flip_undirected.size() != g.num_edges()) {
    throw std::invalid_argument("coboundary: flip mask must have one entry per edge");
  }
  BlockMatrix delta(g.num_edges(), g.num_nodes(), sheaf.stalk_dim());
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto [first, second] = oriented(g.edge(e));
    const bool flip = !flip_undirected.empty() && flip_undirected[e] && g.edge(e).kind == EdgeKind::Undirected;
    const cplx sign = flip ? -1.0 : 1.0;
    delta.set(e, first, sheaf.effective_first(e) * sign);
    delta.set(e, second, sheaf.effective_second(e) * -sign);
  }
  return delta;
}

BlockMatrix laplacian_from_coboundary(const BlockMatrix& delta) {
  return block_matmul(block_conj_transpose(delta), delta);
}

BlockMatrix laplacian_blocks(const DirectedCellularSheaf& sheaf) {
  const auto& g = sheaf.graph();
  BlockMatrix lap(g.num_nodes(), g.num_nodes(), sheaf.stalk_dim());
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto [first, second] = oriented(g.edge(e));
    const ComplexMatrix ff = sheaf.effective_first(e);
    const ComplexMatrix fs = sheaf.effective_second(e);
    const ComplexMatrix ff_h = conj_transpose(ff);
    const ComplexMatrix fs_h = conj_transpose(fs);
    lap.add(first, first, matmul(ff_h, ff));
    lap.add(second, second, matmul(fs_h, fs));
    lap.add(first, second, matmul(ff_h, fs) * cplx(-1.0));
    lap.add(second, first, matmul(fs_h, ff) * cplx(-1.0));
  }
  return lap;
}

std::vector<ComplexMatrix> degree_blocks(const DirectedCellularSheaf& sheaf) {
  const auto& g = sheaf.graph();
  const std::size_t d = sheaf.stalk_dim();
  std::vector<ComplexMatrix> deg(g.num_nodes(), ComplexMatrix(d, d));
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto [first, second] = oriented(g.edge(e));
    const ComplexMatrix ff = sheaf.effective_first(e);
    const ComplexMatrix fs = sheaf.effective_second(e);
    deg[first] += matmul(conj_transpose(ff), ff);
    deg[second] += matmul(conj_transpose(fs), fs);
  }
  return deg;
}

BlockMatrix normalize(const BlockMatrix& laplacian, const std::vector<ComplexMatrix>& degrees, double clamp) {
  if (laplacian.block_rows() != laplacian.block_cols() || degrees.size() != laplacian.block_rows()) {
    throw std::invalid_argument("normalize: need one degree block per node");
  }
  std::vector<ComplexMatrix> roots;
  roots.reserve(degrees.size());
  for (const auto& dg : degrees) roots.push_back(inv_sqrt_psd(dg, clamp));

  BlockMatrix out(laplacian.block_rows(), laplacian.block_cols(), laplacian.block_size());
  // Form each mirrored pair once so the result is Hermitian to the last bit;
  // with ill-conditioned degree blocks the two products otherwise round apart.
  for (const auto& [key, blk] : laplacian.blocks()) {
    const auto [a, b] = key;
    if (a > b && laplacian.find(b, a) != nullptr) continue;
    ComplexMatrix m = matmul(matmul(roots[a], blk), roots[b]);
    if (a == b) {
      m = (m + conj_transpose(m)) * cplx(0.5);
    } else {
      out.set(b, a, conj_transpose(m));
    }
    out.set(a, b, std::move(m));
  }
  return out;
}

BlockMatrix normalized_laplacian(const DirectedCellularSheaf& sheaf, double clamp) {
  return normalize(laplacian_blocks(sheaf), degree_blocks(sheaf), clamp);
}

ComplexMatrix apply_laplacian_flows(const DirectedCellularSheaf& sheaf, const ComplexMatrix& x) {
  const auto& g = sheaf.graph();
  const std::size_t d = sheaf.stalk_dim();
  if (x.rows() != g.num_nodes() * d) throw std::invalid_argument("apply_laplacian_flows: shape mismatch");
  const std::size_t k = x.cols();

  auto stalk = [&](std::size_t u) {
    ComplexMatrix s(d, k);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < k; ++c) s(r, c) = x(u * d + r, c);
    return s;
  };
  ComplexMatrix y(x.rows(), k);
  auto accumulate = [&](std::size_t u, const ComplexMatrix& contrib) {
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < k; ++c) y(u * d + r, c) += contrib(r, c);
  };

  // Each endpoint w of e receives F*_{w⊴e}(F_{w⊴e} x_w − F_{o⊴e} x_o), o the other
  // endpoint. Summed over edges this is the outflow term at directed tails, the
  // inflow term at directed heads and the undirected term otherwise.
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto [first, second] = oriented(g.edge(e));
    const ComplexMatrix ff = sheaf.effective_first(e);
    const ComplexMatrix fs = sheaf.effective_second(e);
    const ComplexMatrix xf = stalk(first);
    const ComplexMatrix xs = stalk(second);
    accumulate(first, matmul(conj_transpose(ff), matmul(ff, xf) - matmul(fs, xs)));
    accumulate(second, matmul(conj_transpose(fs), matmul(fs, xs) - matmul(ff, xf)));
  }
  return y;
}

// ---------------------------------------------------------------------------

RealMatrix classical_sheaf_laplacian(const DirectedCellularSheaf& sheaf) {
  const auto& g = sheaf.graph();
  const std::size_t d = sheaf.stalk_dim();
  RealMatrix lap(g.num_nodes() * d, g.num_nodes() * d);
  auto add_block = [&](std::size_t bu, std::size_t bv, const RealMatrix& b, double sign) {
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) lap(bu * d + r, bv * d + c) += sign * b(r, c);
  };
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto& edge = g.edge(e);
    const auto [first, second] = oriented(edge);
    const RealMatrix& fu = sheaf.base_maps()[e].first;
    const RealMatrix& fv = sheaf.base_maps()[e].second;
    const RealMatrix fu_t = transpose(fu);
    const RealMatrix fv_t = transpose(fv);
    add_block(first, first, matmul(fu_t, fu), 1.0);
    add_block(second, second, matmul(fv_t, fv), 1.0);
    add_block(first, second, matmul(fu_t, fv), -1.0);
    add_block(second, first, matmul(fv_t, fu), -1.0);
  }
  return lap;
}

namespace {

RealMatrix symmetrized(const AdjacencyMatrix& a) {
  const std::size_t n = a.size();
  RealMatrix s(n, n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) s(u, v) = 0.5 * (a(u, v) + a(v, u));
  return s;
}

cplx adjacency_phase(const AdjacencyMatrix& a, double q, std::size_t u, std::size_t v) {
  const int diff = int(a(u, v)) - int(a(v, u));
  return std::polar(1.0, 2.0 * std::numbers::pi * q * static_cast<double>(diff));
}

}  // namespace

ComplexMatrix magnetic_laplacian(const DirectedGraph& graph, double q, bool normalized) {
  const std::size_t n = graph.num_nodes();
  const AdjacencyMatrix a = adjacency(graph);
  const RealMatrix as = symmetrized(a);
  std::vector<double> deg(n, 0.0);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) deg[u] += as(u, v);

  ComplexMatrix h(n, n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (as(u, v) != 0.0) h(u, v) = as(u, v) * adjacency_phase(a, q, u, v);

  ComplexMatrix lap(n, n);
  if (!normalized) {
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) lap(u, v) = -h(u, v);
      lap(u, u) += deg[u];
    }
    return lap;
  }
  std::vector<double> root(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) root[u] = deg[u] > 0.0 ? 1.0 / std::sqrt(deg[u]) : 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) lap(u, v) = -root[u] * h(u, v) * root[v];
    lap(u, u) += 1.0;
  }
  return lap;
}

ComplexMatrix sign_magnetic_laplacian(const DirectedGraph& graph) {
  const std::size_t n = graph.num_nodes();
  const AdjacencyMatrix a = adjacency(graph);
  const RealMatrix as = symmetrized(a);
  auto sgn = [](double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); };

  ComplexMatrix lap(n, n);
  for (std::size_t u = 0; u < n; ++u) {
    double dbar = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      dbar += std::abs(as(u, v));
      const double auv = a(u, v);
      const double avu = a(v, u);
      const cplx pattern(1.0 - sgn(std::abs(auv - avu)), sgn(std::abs(auv) - std::abs(avu)));
      lap(u, v) = -as(u, v) * pattern;
    }
    lap(u, u) += dbar;
  }
  return lap;
}

ComplexMatrix complex_incidence(const DirectedGraph& graph, double q) {
  const AdjacencyMatrix a = adjacency(graph);
  ComplexMatrix b(graph.num_nodes(), graph.num_edges());
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const Edge& edge = graph.edge(e);
    if (edge.kind == EdgeKind::Directed) {
      // Row v of e = (u, v) falls in the "e = (v', u')" case with u' = v.
      b(edge.u, e) = 1.0;
      b(edge.v, e) = -adjacency_phase(a, q, edge.v, edge.u);
    } else {
      b(std::min(edge.u, edge.v), e) = 1.0;
      b(std::max(edge.u, edge.v), e) = -1.0;
    }
  }
  return b;
}

SpectralReport spectral_report(const ComplexMatrix& dense, std::size_t cap) {
  if (dense.rows() > cap) {
    throw std::length_error("spectral_report: dimension " + std::to_string(dense.rows()) + " exceeds cap " +
                            std::to_string(cap));
  }
  SpectralReport r;
  r.hermiticity_defect = max_abs_diff(dense, conj_transpose(dense));
  if (dense.rows() == 0) return r;
  const auto eig = herm_eigvals(dense);
  r.min_eig = eig.front();
  r.max_eig = eig.back();
  return r;
}

SpectralReport spectral_report(const BlockMatrix& laplacian, std::size_t cap) {
  if (laplacian.block_rows() * laplacian.block_size() > cap) {
    throw std::length_error("spectral_report: matrix too large for the dense eigensolver");
  }
  return spectral_report(laplacian.densify(), cap);
}

}  // namespace dsheaf
