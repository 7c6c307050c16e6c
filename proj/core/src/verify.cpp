#include "dsheaf/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dsheaf {

DirectedGraph random_graph(Rng& rng, std::size_t n, double p, GraphShape shape, double directed_share,
                           std::size_t isolated) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<bool> excluded(n, false);
  for (std::size_t k = 0; k < std::min(isolated, n); ++k) excluded[order[k]] = true;

  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (excluded[u] || excluded[v] || !rng.bernoulli(p)) continue;
      bool directed = false;
      switch (shape) {
        case GraphShape::Directed: directed = true; break;
        case GraphShape::Undirected: directed = false; break;
        case GraphShape::Mixed: directed = rng.bernoulli(directed_share); break;
      }
      const bool swap = rng.bernoulli(0.5);
      edges.push_back({swap ? v : u, swap ? u : v, directed ? EdgeKind::Directed : EdgeKind::Undirected});
    }
  }
  // Shuffle edge order so edge indices are unrelated to node order.
  rng.shuffle(std::span<Edge>(edges));
  return DirectedGraph(n, std::move(edges));
}

namespace {

constexpr MapClass kClasses[] = {MapClass::Diagonal, MapClass::Orthogonal, MapClass::General};

std::size_t draw_nodes(Rng& rng, std::size_t max_nodes) {
  if (max_nodes < 2) throw std::invalid_argument("verify: max_nodes must be at least 2");
  return 2 + rng.below(max_nodes - 1);
}

double edge_probability(Rng& rng, std::size_t n) {
  // Mean degree between 1 and 6, capped for tiny graphs.
  const double mean_degree = rng.uniform(1.0, 6.0);
  return std::min(1.0, mean_degree / static_cast<double>(n - 1));
}

std::size_t draw_isolated(Rng& rng, std::size_t n) {
  if (!rng.bernoulli(1.0 / 3.0)) return 0;
  return 1 + rng.below(std::max<std::size_t>(1, n / 5));
}

ComplexMatrix random_cochain(Rng& rng, std::size_t rows, std::size_t cols) {
  ComplexMatrix x(rows, cols);
  for (auto& v : x.data()) v = {rng.normal(), rng.normal()};
  return x;
}

double max_abs_diff(const ComplexMatrix& a, const RealMatrix& b) { return dsheaf::max_abs_diff(a, to_complex(b)); }

class Tally {
public:
  Tally(std::string name, double tolerance) { result_.name = std::move(name), result_.tolerance = tolerance; }

  void record(double defect) {
    ++result_.total;
    if (std::isfinite(defect) && defect <= result_.tolerance) ++result_.passed;
    if (!std::isfinite(defect)) {
      result_.worst = defect;
    } else if (std::isfinite(result_.worst)) {
      result_.worst = std::max(result_.worst, defect);
    }
  }
  [[nodiscard]] SuiteResult result() const { return result_; }

private:
  SuiteResult result_;
};

}  // namespace

DirectedCellularSheaf random_instance(Rng& rng, std::size_t index, std::size_t max_nodes) {
  const std::size_t n = draw_nodes(rng, max_nodes);
  const DirectedGraph g = random_graph(rng, n, edge_probability(rng, n), GraphShape::Mixed, rng.uniform(0.2, 0.8),
                                       draw_isolated(rng, n));
  SheafConfig cfg;
  cfg.d = 1 + rng.below(4);
  cfg.q = kPhaseGrid[index % std::size(kPhaseGrid)];
  cfg.map_class = kClasses[(index / std::size(kPhaseGrid)) % std::size(kClasses)];
  return random_sheaf(g, cfg, rng);
}

std::vector<SuiteResult> run_sheaf_suites(const VerifyOptions& options) {
  const double sign = options.flip_phase_sign ? -1.0 : 1.0;

  Tally hermitian("hermitian", 1e-12);
  Tally psd("psd", 1e-9);
  Tally cap("spectral_cap", 1e-9);
  Tally assembly("assembly", 1e-12);
  Tally orientation("orientation", 1e-13);
  Tally flows("flows", 1e-12);
  Tally generalization("generalization", 1e-13);
  Tally magnetic("magnetic", 1e-12);
  Tally incidence("incidence", 1e-13);
  Tally symmetry("phase_symmetry", 1e-15);

  for (std::size_t t = 0; t < options.trials; ++t) {
    Rng rng(derive_seed(options.seed, "verify", t));
    const double q = kPhaseGrid[t % std::size(kPhaseGrid)];

    // Spectral, structural and assembly checks on a random mixed sheaf.
    {
      const DirectedCellularSheaf base = random_instance(rng, t, options.max_nodes);
      SheafConfig cfg = base.config();
      cfg.q = sign * cfg.q;
      const DirectedCellularSheaf sheaf(base.graph(), cfg, base.base_maps());
      const BlockMatrix lap = laplacian_blocks(sheaf);
      const BlockMatrix norm = normalized_laplacian(sheaf);
      const ComplexMatrix dense = lap.densify();
      const ComplexMatrix dense_norm = norm.densify();

      hermitian.record(std::max(hermiticity_defect(dense), hermiticity_defect(dense_norm)));

      const SpectralReport rl = spectral_report(dense);
      const SpectralReport rn = spectral_report(dense_norm);
      // λ_min ≥ −tol·λ_max for L, λ_min ≥ −tol for L_N.
      const double below = std::max(0.0, -rl.min_eig);
      const double relative = below == 0.0 ? 0.0 : rl.max_eig > 0.0 ? below / rl.max_eig : below;
      psd.record(std::max({relative, -rn.min_eig}));
      cap.record(std::max(0.0, rn.max_eig - 2.0));

      const BlockMatrix delta = coboundary(sheaf);
      assembly.record(dsheaf::max_abs_diff(laplacian_from_coboundary(delta).densify(), dense));

      std::vector<bool> flips(sheaf.graph().num_edges());
      for (std::size_t e = 0; e < flips.size(); ++e) flips[e] = rng.bernoulli(0.5);
      orientation.record(dsheaf::max_abs_diff(laplacian_from_coboundary(coboundary(sheaf, flips)).densify(), dense));

      const ComplexMatrix x = random_cochain(rng, sheaf.graph().num_nodes() * sheaf.stalk_dim(), 2);
      const ComplexMatrix lx = block_matmul(lap, x);
      flows.record(dsheaf::max_abs_diff(apply_laplacian_flows(sheaf, x), lx) / std::max(1.0, max_abs(lx)));
    }

    // Reduction to the classical sheaf Laplacian.
    {
      const std::size_t n = draw_nodes(rng, options.max_nodes);
      const DirectedGraph undirected =
          random_graph(rng, n, edge_probability(rng, n), GraphShape::Undirected, 0.0, draw_isolated(rng, n));
      SheafConfig cfg{1 + rng.below(4), sign * q, kClasses[t % std::size(kClasses)]};
      const DirectedCellularSheaf sheaf = random_sheaf(undirected, cfg, rng);
      const ComplexMatrix lap = laplacian_blocks(sheaf).densify();
      double defect = max_abs_diff(lap, classical_sheaf_laplacian(sheaf));
      defect = std::max(defect, max_abs(imag_part(lap)));

      // Trivial sheaf on an undirected graph gives D − A.
      const ComplexMatrix trivial = laplacian_blocks(trivial_sheaf(undirected, sign * q)).densify();
      RealMatrix combinatorial(n, n);
      const AdjacencyMatrix a = adjacency(undirected);
      for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
          if (a(u, v) != 0) {
            combinatorial(u, v) -= 1.0;
            combinatorial(u, u) += 1.0;
          }
        }
      }
      defect = std::max(defect, max_abs_diff(trivial, combinatorial));

      // q = 0 on a directed graph drops the phases entirely.
      const DirectedGraph directed = random_graph(rng, n, edge_probability(rng, n), GraphShape::Directed);
      const DirectedCellularSheaf flat = random_sheaf(directed, {cfg.d, 0.0, cfg.map_class}, rng);
      defect = std::max(defect, max_abs_diff(laplacian_blocks(flat).densify(), classical_sheaf_laplacian(flat)));
      generalization.record(defect);
    }

    // Magnetic Laplacian correspondence for the trivial sheaf.
    {
      const std::size_t n = draw_nodes(rng, options.max_nodes);
      const DirectedGraph directed =
          random_graph(rng, n, edge_probability(rng, n), GraphShape::Directed, 1.0, draw_isolated(rng, n));
      const ComplexMatrix lap = laplacian_blocks(trivial_sheaf(directed, sign * q)).densify();
      double defect = dsheaf::max_abs_diff(lap, 2.0 * magnetic_laplacian(directed, q));
      const ComplexMatrix quarter = laplacian_blocks(trivial_sheaf(directed, sign * 0.25)).densify();
      defect = std::max(defect, dsheaf::max_abs_diff(quarter, 2.0 * sign_magnetic_laplacian(directed)));

      const DirectedGraph undirected = directed.undirected_version();
      const ComplexMatrix lu = laplacian_blocks(trivial_sheaf(undirected, sign * q)).densify();
      defect = std::max(defect, dsheaf::max_abs_diff(lu, magnetic_laplacian(undirected, q)));
      magnetic.record(defect);
    }

    // Factorization through the complex incidence matrix on a mixed graph.
    {
      const std::size_t n = draw_nodes(rng, options.max_nodes);
      const DirectedGraph mixed = random_graph(rng, n, edge_probability(rng, n), GraphShape::Mixed,
                                               rng.uniform(0.2, 0.8), draw_isolated(rng, n));
      const ComplexMatrix lap = laplacian_blocks(trivial_sheaf(mixed, sign * q)).densify();
      const ComplexMatrix b = complex_incidence(mixed, q);
      incidence.record(dsheaf::max_abs_diff(lap, matmul(b, conj_transpose(b))));
    }

    // T_uv · T_vu = 1 and |T_uv| = 1.
    {
      const double qq = rng.uniform(-2.0, 2.0);
      double defect = 0.0;
      for (int a = 0; a <= 1; ++a) {
        for (int b = 0; b <= 1; ++b) {
          const cplx t_uv = phase(qq, a, b);
          const cplx t_vu = phase(qq, b, a);
          defect = std::max({defect, std::abs(t_uv * t_vu - 1.0), std::abs(std::abs(t_uv) - 1.0),
                             std::abs(t_vu - std::conj(t_uv))});
        }
      }
      symmetry.record(defect);
    }
  }

  return {hermitian.result(),   psd.result(),       cap.result(),       assembly.result(),
          orientation.result(), flows.result(),     generalization.result(), magnetic.result(),
          incidence.result(),   symmetry.result()};
}

}  // namespace dsheaf
