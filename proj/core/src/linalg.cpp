#include "dsheaf/linalg.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace dsheaf {

namespace {

template <typename T>
Matrix<T> matmul_impl(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                                std::to_string(b.rows()) + " differ");
  }
  Matrix<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto crow = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      if (aik == T(0)) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

}  // namespace

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) { return matmul_impl(a, b); }
RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) { return matmul_impl(a, b); }

ComplexMatrix conj_transpose(const ComplexMatrix& a) {
  ComplexMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = std::conj(a(i, j));
  return t;
}

RealMatrix transpose(const RealMatrix& a) {
  RealMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

ComplexMatrix to_complex(const RealMatrix& a) {
  ComplexMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i];
  return c;
}

RealMatrix real_part(const ComplexMatrix& a) {
  RealMatrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) r.data()[i] = a.data()[i].real();
  return r;
}

RealMatrix imag_part(const ComplexMatrix& a) {
  RealMatrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) r.data()[i] = a.data()[i].imag();
  return r;
}

RealMatrix inverse(const RealMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("inverse: matrix not square");
  const std::size_t n = a.rows();
  RealMatrix w = a;
  RealMatrix inv = RealMatrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(w(r, col)) > std::abs(w(piv, col))) piv = r;
    if (w(piv, col) == 0.0) throw std::invalid_argument("inverse: matrix is singular");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(w(piv, j), w(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    }
    const double p = 1.0 / w(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      w(col, j) *= p;
      inv(col, j) *= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = w(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        w(r, j) -= f * w(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

double max_abs(const ComplexMatrix& a) {
  double m = 0.0;
  for (const auto& v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs(const RealMatrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

double frobenius(const ComplexMatrix& a) {
  double s = 0.0;
  for (const auto& v : a.data()) s += std::norm(v);
  return std::sqrt(s);
}

double frobenius(const RealMatrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// BlockMatrix

void BlockMatrix::check_index(std::size_t i, std::size_t j) const {
  if (i >= block_rows_ || j >= block_cols_) throw std::out_of_range("BlockMatrix: block index out of range");
}

void BlockMatrix::add(std::size_t i, std::size_t j, const ComplexMatrix& b) {
  check_index(i, j);
  if (b.rows() != d_ || b.cols() != d_) throw std::invalid_argument("BlockMatrix: block must be d×d");
  auto [it, inserted] = blocks_.try_emplace({i, j}, b);
  if (!inserted) it->second += b;
}

void BlockMatrix::set(std::size_t i, std::size_t j, ComplexMatrix b) {
  check_index(i, j);
  if (b.rows() != d_ || b.cols() != d_) throw std::invalid_argument("BlockMatrix: block must be d×d");
  blocks_.insert_or_assign({i, j}, std::move(b));
}

const ComplexMatrix* BlockMatrix::find(std::size_t i, std::size_t j) const {
  auto it = blocks_.find({i, j});
  return it == blocks_.end() ? nullptr : &it->second;
}

ComplexMatrix BlockMatrix::block(std::size_t i, std::size_t j) const {
  check_index(i, j);
  const auto* b = find(i, j);
  return b ? *b : ComplexMatrix(d_, d_);
}

ComplexMatrix BlockMatrix::densify() const {
  ComplexMatrix dense(block_rows_ * d_, block_cols_ * d_);
  for (const auto& [key, b] : blocks_) {
    const auto [bi, bj] = key;
    for (std::size_t r = 0; r < d_; ++r)
      for (std::size_t c = 0; c < d_; ++c) dense(bi * d_ + r, bj * d_ + c) = b(r, c);
  }
  return dense;
}

ComplexMatrix block_matmul(const BlockMatrix& a, const ComplexMatrix& x) {
  const std::size_t d = a.block_size();
  if (x.rows() != a.block_cols() * d) throw std::invalid_argument("block_matmul: shape mismatch");
  const std::size_t k = x.cols();
  ComplexMatrix y(a.block_rows() * d, k);
  for (const auto& [key, b] : a.blocks()) {
    const auto [bi, bj] = key;
    for (std::size_t r = 0; r < d; ++r) {
      auto yrow = y.row(bi * d + r);
      for (std::size_t c = 0; c < d; ++c) {
        const cplx w = b(r, c);
        if (w == cplx(0)) continue;
        auto xrow = x.row(bj * d + c);
        for (std::size_t j = 0; j < k; ++j) yrow[j] += w * xrow[j];
      }
    }
  }
  return y;
}

BlockMatrix block_matmul(const BlockMatrix& a, const BlockMatrix& b) {
  if (a.block_cols() != b.block_rows() || a.block_size() != b.block_size()) {
    throw std::invalid_argument("block_matmul: shape mismatch");
  }
  std::vector<std::vector<std::pair<std::size_t, const ComplexMatrix*>>> b_rows(b.block_rows());
  for (const auto& [key, blk] : b.blocks()) b_rows[key.first].emplace_back(key.second, &blk);

  BlockMatrix c(a.block_rows(), b.block_cols(), a.block_size());
  for (const auto& [key, ablk] : a.blocks()) {
    for (const auto& [j, bblk] : b_rows[key.second]) c.add(key.first, j, matmul(ablk, *bblk));
  }
  return c;
}

BlockMatrix block_conj_transpose(const BlockMatrix& a) {
  BlockMatrix t(a.block_cols(), a.block_rows(), a.block_size());
  for (const auto& [key, b] : a.blocks()) t.set(key.second, key.first, conj_transpose(b));
  return t;
}

// ---------------------------------------------------------------------------
// Real lift and eigensolvers

double hermiticity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("hermiticity_defect: matrix not square");
  double defect = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j) defect = std::max(defect, std::abs(m(i, j) - std::conj(m(j, i))));
  return defect;
}

RealMatrix real_lift(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("real_lift: matrix not square");
  if (hermiticity_defect(m) > 1e-10 * frobenius(m)) throw std::invalid_argument("real_lift: matrix is not Hermitian");
  const std::size_t n = m.rows();
  RealMatrix r(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const cplx v = m(i, j);
      r(i, j) = v.real();
      r(i, j + n) = -v.imag();
      r(i + n, j) = v.imag();
      r(i + n, j + n) = v.real();
    }
  }
  return r;
}

ComplexMatrix real_unlift(const RealMatrix& lifted) {
  if (lifted.rows() != lifted.cols() || lifted.rows() % 2 != 0) {
    throw std::invalid_argument("real_unlift: expected a 2N×2N matrix");
  }
  const std::size_t n = lifted.rows() / 2;
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = {lifted(i, j), lifted(i + n, j)};
  return m;
}

namespace {

double off_diagonal_norm(const RealMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

SymmetricEigen jacobi_eigen(const RealMatrix& input, bool want_vectors, int max_sweeps) {
  if (input.rows() != input.cols()) throw std::invalid_argument("jacobi_eigen: matrix not square");
  const std::size_t n = input.rows();
  RealMatrix a = input;
  RealMatrix v = want_vectors ? RealMatrix::identity(n) : RealMatrix();
  const double target = 1e-12 * frobenius(input);

  bool converged = false;
  for (int sweep = 0; sweep <= max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) {
      converged = true;
      break;
    }
    if (sweep == max_sweeps) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          const double np = c * akp - s * akq;
          const double nq = s * akp + c * akq;
          a(k, p) = np;
          a(p, k) = np;
          a(k, q) = nq;
          a(q, k) = nq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        if (want_vectors) {
          for (std::size_t k = 0; k < n; ++k) {
            const double vkp = v(k, p);
            const double vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }
  if (!converged) throw std::runtime_error("jacobi_eigen: no convergence within sweep cap");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  SymmetricEigen out;
  out.values.resize(n);
  if (want_vectors) out.vectors = RealMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    if (want_vectors)
      for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

std::vector<double> lifted_eigvals(const ComplexMatrix& m) {
  return jacobi_eigen(real_lift(m), /*want_vectors=*/false).values;
}

std::vector<double> herm_eigvals(const ComplexMatrix& m) {
  const auto lifted = lifted_eigvals(m);
  std::vector<double> out;
  out.reserve(lifted.size() / 2);
  // Sorted lift spectrum is λ1, λ1, λ2, λ2, ...; average each pair.
  for (std::size_t k = 0; k + 1 < lifted.size(); k += 2) out.push_back(0.5 * (lifted[k] + lifted[k + 1]));
  return out;
}

namespace {

double root_threshold(const std::vector<double>& values, double clamp, double frob) {
  if (values.empty()) return 0.0;
  const double lo = values.front();
  if (lo < -1e-10 * frob) throw std::invalid_argument("inv_sqrt_psd: matrix is indefinite");
  const double hi = values.back();
  return hi > 0.0 ? clamp * hi : 0.0;
}

RealMatrix apply_root(const SymmetricEigen& eig, double threshold) {
  const std::size_t n = eig.values.size();
  RealMatrix r(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = eig.values[k];
    if (!(lam > threshold) || lam <= 0.0) continue;
    const double g = 1.0 / std::sqrt(lam);
    for (std::size_t i = 0; i < n; ++i) {
      const double vi = g * eig.vectors(i, k);
      for (std::size_t j = 0; j < n; ++j) r(i, j) += vi * eig.vectors(j, k);
    }
  }
  return r;
}

}  // namespace

ComplexMatrix inv_sqrt_psd(const ComplexMatrix& m, double clamp) {
  const RealMatrix lifted = real_lift(m);
  const auto eig = jacobi_eigen(lifted);
  const double threshold = root_threshold(eig.values, clamp, frobenius(m));
  return real_unlift(apply_root(eig, threshold));
}

InvSqrtResult inv_sqrt_psd_sym(const RealMatrix& m, double clamp) {
  if (m.rows() != m.cols()) throw std::invalid_argument("inv_sqrt_psd_sym: matrix not square");
  InvSqrtResult out;
  out.eigen = jacobi_eigen(m);
  out.threshold = root_threshold(out.eigen.values, clamp, frobenius(m));
  out.root = apply_root(out.eigen, out.threshold);
  return out;
}

}  // namespace dsheaf
