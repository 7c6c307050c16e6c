#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dsheaf/sheaf.hpp"
#include "dsheaf/verify.hpp"

using namespace dsheaf;

namespace {

const cplx I{0.0, 1.0};

DirectedGraph single_arc() { return DirectedGraph(2, {{0, 1, EdgeKind::Directed}}); }

DirectedGraph directed_triangle() {
  return DirectedGraph(3, {{0, 1, EdgeKind::Directed}, {1, 2, EdgeKind::Directed}, {2, 0, EdgeKind::Directed}});
}

void expect_near(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  EXPECT_LE(max_abs_diff(a, b), tol);
}

}  // namespace

TEST(Phase, UnitModulusAndConjugateSymmetry) {
  EXPECT_EQ(phase(0.25, 1, 1), cplx(1.0, 0.0));
  EXPECT_EQ(phase(0.25, 0, 0), cplx(1.0, 0.0));
  EXPECT_NEAR(std::abs(phase(0.25, 1, 0) - I), 0.0, 1e-16);
  EXPECT_NEAR(std::abs(phase(0.25, 0, 1) + I), 0.0, 1e-16);
  EXPECT_NEAR(std::abs(phase(0.5, 1, 0) + 1.0), 0.0, 1e-15);
  EXPECT_EQ(phase(0.0, 1, 0), cplx(1.0, 0.0));
}

TEST(Sheaf, RejectsMisshapenMaps) {
  const DirectedGraph g = single_arc();
  EXPECT_THROW(DirectedCellularSheaf(g, {2, 0.1, MapClass::General}, {}), std::invalid_argument);
  EXPECT_THROW(DirectedCellularSheaf(g, {2, 0.1, MapClass::General}, {{RealMatrix(2, 2), RealMatrix(1, 1)}}),
               std::invalid_argument);
}

TEST(Sheaf, SecondEndpointCarriesThePhase) {
  const auto s = trivial_sheaf(single_arc(), 0.25);
  EXPECT_EQ(s.effective_first(0)(0, 0), cplx(1.0, 0.0));
  EXPECT_NEAR(std::abs(s.effective_second(0)(0, 0) - I), 0.0, 1e-16);
  EXPECT_THROW((void)s.base_map(0, 5), std::invalid_argument);
}

TEST(Laplacian, SingleArcQuarter) {
  const ComplexMatrix l = laplacian_blocks(trivial_sheaf(single_arc(), 0.25)).densify();
  expect_near(l, ComplexMatrix{{1.0, -I}, {I, 1.0}}, 1e-15);
  expect_near(l, magnetic_laplacian(single_arc(), 0.25) * cplx(2.0), 1e-15);
  expect_near(l, sign_magnetic_laplacian(single_arc()) * cplx(2.0), 1e-15);
}

TEST(Laplacian, IncidenceUsesPhaseOfReverseArc) {
  // The tail column entry is 1; the head entry is −T_{vu} with T_{vu} = −i,
  // which is what makes B̂B̂* reproduce the Laplacian.
  const ComplexMatrix b = complex_incidence(single_arc(), 0.25);
  expect_near(b, ComplexMatrix{{1.0}, {I}}, 1e-15);
  const ComplexMatrix l = laplacian_blocks(trivial_sheaf(single_arc(), 0.25)).densify();
  expect_near(matmul(b, conj_transpose(b)), l, 1e-15);
}

TEST(Laplacian, DirectedTriangleSpectrum) {
  // Circulant with eigenvalues 2 − √3, 2, 2 + √3 at q = 1/4.
  const auto ev = herm_eigvals(laplacian_blocks(trivial_sheaf(directed_triangle(), 0.25)).densify());
  EXPECT_NEAR(ev[0], 2.0 - std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(ev[1], 2.0, 1e-12);
  EXPECT_NEAR(ev[2], 2.0 + std::sqrt(3.0), 1e-12);
}

TEST(Laplacian, TreesAreGaugeEquivalentToUndirected) {
  const DirectedGraph path(3, {{0, 1, EdgeKind::Directed}, {2, 1, EdgeKind::Undirected}});
  const auto s = trivial_sheaf(path, 0.1);
  const auto ev = herm_eigvals(laplacian_blocks(s).densify());
  EXPECT_NEAR(ev[0], 0.0, 1e-12);
  EXPECT_NEAR(ev[1], 1.0, 1e-12);
  EXPECT_NEAR(ev[2], 3.0, 1e-12);
  const auto evn = herm_eigvals(normalized_laplacian(s).densify());
  EXPECT_NEAR(evn[0], 0.0, 1e-12);
  EXPECT_NEAR(evn[1], 1.0, 1e-12);
  EXPECT_NEAR(evn[2], 2.0, 1e-12);
}

TEST(Laplacian, UndirectedTrivialSheafIsCombinatorial) {
  const DirectedGraph g(4, {{0, 1, EdgeKind::Undirected}, {2, 1, EdgeKind::Undirected}, {3, 0, EdgeKind::Undirected}});
  const ComplexMatrix l = laplacian_blocks(trivial_sheaf(g, 0.37)).densify();
  const ComplexMatrix expected{{2.0, -1.0, 0.0, -1.0}, {-1.0, 2.0, -1.0, 0.0}, {0.0, -1.0, 1.0, 0.0},
                               {-1.0, 0.0, 0.0, 1.0}};
  EXPECT_EQ(l, expected);
}

TEST(Laplacian, IsolatedNodeHasZeroNormalizedRow) {
  const DirectedGraph g(3, {{0, 1, EdgeKind::Directed}});
  const ComplexMatrix ln = normalized_laplacian(trivial_sheaf(g, 0.25)).densify();
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(ln(2, j), cplx(0.0));
    EXPECT_EQ(ln(j, 2), cplx(0.0));
  }
  EXPECT_NEAR(ln(0, 0).real(), 1.0, 1e-15);
}

TEST(Laplacian, FlowsMatchAssembledOperator) {
  Rng rng(12);
  for (std::size_t t = 0; t < 10; ++t) {
    const auto s = random_instance(rng, t, 20);
    ComplexMatrix x(s.graph().num_nodes() * s.stalk_dim(), 3);
    for (auto& v : x.data()) v = {rng.normal(), rng.normal()};
    const ComplexMatrix lx = block_matmul(laplacian_blocks(s), x);
    expect_near(apply_laplacian_flows(s, x), lx, 1e-12 * std::max(1.0, max_abs(lx)));
  }
}

TEST(Laplacian, OrientationOfUndirectedEdgesIsIrrelevant) {
  Rng rng(4);
  const auto s = random_instance(rng, 2, 15);
  std::vector<bool> flips(s.graph().num_edges(), true);
  expect_near(laplacian_from_coboundary(coboundary(s, flips)).densify(), laplacian_blocks(s).densify(), 1e-13);
}

TEST(Laplacian, CoboundaryRowSigns) {
  const DirectedGraph g(2, {{1, 0, EdgeKind::Undirected}});
  const auto s = trivial_sheaf(g, 0.25);
  const BlockMatrix d = coboundary(s);
  // (min, max) orientation: + at node 0, − at node 1.
  EXPECT_EQ(d.block(0, 0)(0, 0), cplx(1.0));
  EXPECT_EQ(d.block(0, 1)(0, 0), cplx(-1.0));
  const BlockMatrix flipped = coboundary(s, {true});
  EXPECT_EQ(flipped.block(0, 0)(0, 0), cplx(-1.0));
}

TEST(Cayley, TwoByTwoClosedForm) {
  for (double s : {0.0, 0.3, -1.7, 4.0}) {
    const double p[] = {s};
    const RealMatrix q = cayley_orthogonal(p, 2);
    const double c = 1.0 / (1.0 + s * s);
    EXPECT_NEAR(q(0, 0), c * (1 - s * s), 1e-15);
    EXPECT_NEAR(q(0, 1), c * (-2 * s), 1e-15);
    EXPECT_NEAR(q(1, 0), c * (2 * s), 1e-15);
    EXPECT_NEAR(q(1, 1), c * (1 - s * s), 1e-15);
  }
}

TEST(Cayley, OrthogonalForRandomParameters) {
  Rng rng(6);
  for (std::size_t d = 2; d <= 5; ++d) {
    std::vector<double> p(d * (d - 1) / 2);
    for (auto& v : p) v = 3.0 * rng.normal();
    const RealMatrix q = cayley_orthogonal(p, d);
    const RealMatrix qtq = matmul(transpose(q), q);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(qtq(i, j), i == j ? 1.0 : 0.0, 1e-12);
  }
}

TEST(Spectral, ReportAndSizeCap) {
  const auto r = spectral_report(normalized_laplacian(trivial_sheaf(directed_triangle(), 0.25)));
  EXPECT_LE(r.max_eig, 2.0 + 1e-12);
  EXPECT_GE(r.min_eig, -1e-12);
  EXPECT_EQ(r.hermiticity_defect, 0.0);
  EXPECT_THROW(spectral_report(ComplexMatrix(5, 5), 4), std::length_error);
}

TEST(Spectral, CapIsAttainedOnBipartiteArc) {
  const auto ev = herm_eigvals(normalized_laplacian(trivial_sheaf(single_arc(), 0.25)).densify());
  EXPECT_NEAR(ev[0], 0.0, 1e-14);
  EXPECT_NEAR(ev[1], 2.0, 1e-14);
}

TEST(Reference, MagneticNormalizedHasUnitDiagonal) {
  const ComplexMatrix ln = magnetic_laplacian(directed_triangle(), 0.1, true);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(ln(i, i).real(), 1.0, 1e-15);
  // A_s = 1/2 per arc, D_s = 1, so off-diagonals are −T/2.
  EXPECT_NEAR(std::abs(ln(0, 1) + 0.5 * std::polar(1.0, 2 * std::numbers::pi * 0.1)), 0.0, 1e-15);
}

TEST(Reference, ClassicalLaplacianMatchesPhaseFreeSheaf) {
  Rng rng(21);
  const DirectedGraph g = random_graph(rng, 12, 0.3, GraphShape::Directed);
  const auto s = random_sheaf(g, {3, 0.0, MapClass::General}, rng);
  expect_near(laplacian_blocks(s).densify(), to_complex(classical_sheaf_laplacian(s)), 1e-13);
}
