#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "dsheaf/linalg.hpp"
#include "dsheaf/random.hpp"

using namespace dsheaf;

namespace {

ComplexMatrix random_hermitian(Rng& rng, std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = rng.normal();
    for (std::size_t j = i + 1; j < n; ++j) {
      m(i, j) = {rng.normal(), rng.normal()};
      m(j, i) = std::conj(m(i, j));
    }
  }
  return m;
}

// Roots of det(λI − A) for Hermitian 3×3 A via the trigonometric form of the
// depressed cubic.
std::vector<double> cubic_eigenvalues(const ComplexMatrix& a) {
  const double p1 = std::norm(a(0, 1)) + std::norm(a(0, 2)) + std::norm(a(1, 2));
  const double tr = (a(0, 0) + a(1, 1) + a(2, 2)).real();
  const double q = tr / 3.0;
  ComplexMatrix b = a;
  for (int i = 0; i < 3; ++i) b(i, i) -= q;
  const double p2 = std::norm(b(0, 0)) + std::norm(b(1, 1)) + std::norm(b(2, 2)) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  b *= cplx(1.0 / p);
  const cplx det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                   b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
  const double r = std::clamp(det.real() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double l1 = q + 2.0 * p * std::cos(phi);
  const double l3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  return {l3, 3.0 * q - l1 - l3, l1};
}

}  // namespace

TEST(Matrix, RejectsNonFiniteAndRaggedInput) {
  EXPECT_THROW(RealMatrix(1, 1, {std::nan("")}), std::invalid_argument);
  EXPECT_THROW(RealMatrix(2, 2, {1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW((RealMatrix{{1.0, 2.0}, {3.0}}), std::invalid_argument);
}

TEST(Matrix, MatmulShapesAndValues) {
  const RealMatrix a{{1, 2}, {3, 4}};
  const RealMatrix b{{5}, {6}};
  EXPECT_EQ(matmul(a, b), (RealMatrix{{17}, {39}}));
  EXPECT_THROW(matmul(b, b), std::invalid_argument);
}

TEST(Matrix, ConjTransposeAndInverse) {
  const ComplexMatrix a{{{1, 2}, {3, -1}}, {{0, 1}, {2, 0}}};
  const ComplexMatrix ah = conj_transpose(a);
  EXPECT_EQ(ah(0, 1), cplx(0, -1));
  EXPECT_EQ(ah(1, 0), cplx(3, 1));

  const RealMatrix m{{4, 7}, {2, 6}};
  const RealMatrix inv = inverse(m);
  EXPECT_NEAR(inv(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(inv(0, 1), -0.7, 1e-15);
  EXPECT_NEAR(inv(1, 0), -0.2, 1e-15);
  EXPECT_NEAR(inv(1, 1), 0.4, 1e-15);
  EXPECT_THROW(inverse(RealMatrix{{1, 2}, {2, 4}}), std::invalid_argument);
}

TEST(BlockMatrix, DensifyAndProducts) {
  BlockMatrix a(2, 2, 1);
  a.set(0, 1, ComplexMatrix{{{0, 1}}});
  a.add(0, 1, ComplexMatrix{{{1, 0}}});
  a.set(1, 1, ComplexMatrix{{{2, 0}}});
  const ComplexMatrix dense = a.densify();
  EXPECT_EQ(dense(0, 1), cplx(1, 1));
  EXPECT_EQ(dense(0, 0), cplx(0, 0));
  EXPECT_EQ(a.find(1, 0), nullptr);

  const ComplexMatrix x{{{1, 0}}, {{0, 2}}};
  const ComplexMatrix ax = block_matmul(a, x);
  EXPECT_EQ(ax, matmul(dense, x));
  EXPECT_EQ(block_conj_transpose(a).densify(), conj_transpose(dense));
  EXPECT_EQ(block_matmul(a, a).densify(), matmul(dense, dense));
}

TEST(RealLift, RoundTripAndHermitianGuard) {
  Rng rng(1);
  const ComplexMatrix h = random_hermitian(rng, 4);
  const RealMatrix lifted = real_lift(h);
  EXPECT_EQ(lifted.rows(), 8u);
  EXPECT_EQ(real_unlift(lifted), h);
  ComplexMatrix bad = h;
  bad(0, 1) += 1.0;
  EXPECT_THROW(real_lift(bad), std::invalid_argument);
}

TEST(Eigen, TwoByTwoMatchesClosedForm) {
  const ComplexMatrix b{{{4, 0}, {0, 1}}, {{0, -1}, {1, 0}}};
  const auto ev = herm_eigvals(b);
  ASSERT_EQ(ev.size(), 2u);
  // (5 ± √13)/2, frozen from an independent LAPACK run.
  EXPECT_NEAR(ev[0], 0.69722436226800533, 1e-10);
  EXPECT_NEAR(ev[1], 4.3027756377319948, 1e-10);
  EXPECT_NEAR(ev[0], (5.0 - std::sqrt(13.0)) / 2.0, 1e-10);
}

TEST(Eigen, ThreeByThreeMatchesCubicRoots) {
  const ComplexMatrix a{{{2, 0}, {1, -1}, {0, 0}}, {{1, 1}, {3, 0}, {0, 2}}, {{0, 0}, {0, -2}, {1, 0}}};
  const auto ev = herm_eigvals(a);
  const auto roots = cubic_eigenvalues(a);
  ASSERT_EQ(ev.size(), 3u);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(ev[k], roots[k], 1e-10);
  EXPECT_NEAR(ev[0], -0.4892885718100789, 1e-10);
  EXPECT_NEAR(ev[1], 1.7108314535516893, 1e-10);
  EXPECT_NEAR(ev[2], 4.7784571182583875, 1e-10);
}

TEST(Eigen, TraceIdentityOnRandomHermitian) {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix h = random_hermitian(rng, 8);
    double trace = 0.0;
    for (std::size_t i = 0; i < 8; ++i) trace += h(i, i).real();
    const auto ev = herm_eigvals(h);
    double sum = 0.0;
    for (double v : ev) sum += v;
    EXPECT_NEAR(sum, trace, 1e-10);
    EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end()));
  }
}

TEST(Eigen, LiftedSpectrumComesInPairs) {
  Rng rng(3);
  const auto lifted = lifted_eigvals(random_hermitian(rng, 5));
  ASSERT_EQ(lifted.size(), 10u);
  for (std::size_t k = 0; k < 10; k += 2) EXPECT_NEAR(lifted[k], lifted[k + 1], 1e-10);
}

TEST(Eigen, JacobiReconstructsMatrix) {
  Rng rng(5);
  RealMatrix a(6, 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i; j < 6; ++j) a(i, j) = a(j, i) = rng.normal();
  const auto eig = jacobi_eigen(a);
  RealMatrix recon(6, 6);
  for (std::size_t k = 0; k < 6; ++k)
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j) recon(i, j) += eig.values[k] * eig.vectors(i, k) * eig.vectors(j, k);
  for (std::size_t i = 0; i < 36; ++i) EXPECT_NEAR(recon.data()[i], a.data()[i], 1e-12);
}

TEST(InvSqrt, MatchesFrozenSymmetricRoot) {
  const RealMatrix c{{1.0, 0.5}, {0.5, 1.0}};
  const auto r = inv_sqrt_psd_sym(c);
  EXPECT_NEAR(r.root(0, 0), 1.1153550716504104, 1e-13);
  EXPECT_NEAR(r.root(0, 1), -0.2988584907226845, 1e-13);
  const ComplexMatrix cr = inv_sqrt_psd(to_complex(c));
  EXPECT_NEAR(cr(1, 0).real(), -0.2988584907226845, 1e-13);
  EXPECT_NEAR(cr(1, 0).imag(), 0.0, 1e-15);
}

TEST(InvSqrt, RootSquaredInvertsMatrix) {
  Rng rng(9);
  ComplexMatrix g(4, 4);
  for (auto& v : g.data()) v = {rng.normal(), rng.normal()};
  const ComplexMatrix m = matmul(conj_transpose(g), g);
  const ComplexMatrix r = inv_sqrt_psd(m);
  const ComplexMatrix prod = matmul(matmul(r, m), r);
  EXPECT_LT(max_abs_diff(prod, ComplexMatrix::identity(4)), 1e-9);
}

TEST(InvSqrt, PseudoInverseZeroesNullspace) {
  EXPECT_EQ(inv_sqrt_psd_sym(RealMatrix(3, 3)).root, RealMatrix(3, 3));
  const RealMatrix rank_one{{1.0, 1.0}, {1.0, 1.0}};
  const auto r = inv_sqrt_psd_sym(rank_one);
  // (1/√2)·(1/2)·[[1,1],[1,1]]
  for (double v : r.root.data()) EXPECT_NEAR(v, 0.5 / std::sqrt(2.0), 1e-13);
  EXPECT_THROW(inv_sqrt_psd_sym(RealMatrix{{1.0, 0.0}, {0.0, -1.0}}), std::invalid_argument);
}
