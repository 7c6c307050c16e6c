#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dsheaf {

using cplx = std::complex<double>;

/// Dense row-major matrix. Used with T = double and T = std::complex<double>.
template <typename T>
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw std::invalid_argument("Matrix: data size does not match shape");
    }
    require_finite();
  }
  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
    require_finite();
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  [[nodiscard]] std::span<T> data() { return data_; }
  [[nodiscard]] std::span<const T> data() const { return data_; }
  [[nodiscard]] std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  [[nodiscard]] std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  Matrix& operator+=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix& operator*=(T s) {
    for (auto& v : data_) v *= s;
    return *this;
  }
  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, T s) { return a *= s; }
  friend Matrix operator*(T s, Matrix a) { return a *= s; }

  bool operator==(const Matrix&) const = default;

  [[nodiscard]] bool is_finite() const {
    for (const auto& v : data_) {
      if constexpr (std::is_same_v<T, double>) {
        if (!std::isfinite(v)) return false;
      } else {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
      }
    }
    return true;
  }

private:
  void require_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("Matrix: shape mismatch");
  }
  void require_finite() const {
    if (!is_finite()) throw std::invalid_argument("Matrix: non-finite entry");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<cplx>;

// Dense operations. All throw std::invalid_argument on non-conformable shapes.

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
RealMatrix matmul(const RealMatrix& a, const RealMatrix& b);
ComplexMatrix conj_transpose(const ComplexMatrix& a);
RealMatrix transpose(const RealMatrix& a);
ComplexMatrix to_complex(const RealMatrix& a);
RealMatrix real_part(const ComplexMatrix& a);
RealMatrix imag_part(const ComplexMatrix& a);

/// Gauss-Jordan with partial pivoting; throws std::invalid_argument if singular.
RealMatrix inverse(const RealMatrix& a);

double max_abs(const ComplexMatrix& a);
double max_abs(const RealMatrix& a);
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
double frobenius(const ComplexMatrix& a);
double frobenius(const RealMatrix& a);

/// Grid of d×d complex blocks; absent blocks are zero.
class BlockMatrix {
public:
  using Key = std::pair<std::size_t, std::size_t>;

  BlockMatrix() = default;
  BlockMatrix(std::size_t block_rows, std::size_t block_cols, std::size_t d)
      : block_rows_(block_rows), block_cols_(block_cols), d_(d) {}

  [[nodiscard]] std::size_t block_rows() const { return block_rows_; }
  [[nodiscard]] std::size_t block_cols() const { return block_cols_; }
  [[nodiscard]] std::size_t block_size() const { return d_; }
  [[nodiscard]] std::size_t stored_blocks() const { return blocks_.size(); }

  /// Adds `b` into block (i, j), creating it if absent.
  void add(std::size_t i, std::size_t j, const ComplexMatrix& b);
  void set(std::size_t i, std::size_t j, ComplexMatrix b);

  /// nullptr when the block is structurally zero.
  [[nodiscard]] const ComplexMatrix* find(std::size_t i, std::size_t j) const;
  /// Returns a zero block when absent.
  [[nodiscard]] ComplexMatrix block(std::size_t i, std::size_t j) const;

  [[nodiscard]] const std::map<Key, ComplexMatrix>& blocks() const { return blocks_; }

  [[nodiscard]] ComplexMatrix densify() const;

private:
  void check_index(std::size_t i, std::size_t j) const;

  std::size_t block_rows_ = 0;
  std::size_t block_cols_ = 0;
  std::size_t d_ = 1;
  std::map<Key, ComplexMatrix> blocks_;
};

/// (block_rows·d × block_cols·d) · (block_cols·d × k).
ComplexMatrix block_matmul(const BlockMatrix& a, const ComplexMatrix& x);
/// Block product of two block matrices with matching block size.
BlockMatrix block_matmul(const BlockMatrix& a, const BlockMatrix& b);
BlockMatrix block_conj_transpose(const BlockMatrix& a);

/// [[Re M, −Im M], [Im M, Re M]]. Requires M Hermitian within 1e-10·‖M‖_F.
RealMatrix real_lift(const ComplexMatrix& m);
/// Inverse of the lift for matrices with the lifted block structure.
ComplexMatrix real_unlift(const RealMatrix& lifted);

double hermiticity_defect(const ComplexMatrix& m);

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  RealMatrix vectors;          // column k pairs with values[k]
};

/// Cyclic Jacobi on a real symmetric matrix. Stops once the off-diagonal
/// Frobenius norm falls to 1e-12·‖A‖_F; throws std::runtime_error after
/// `max_sweeps` sweeps without convergence.
SymmetricEigen jacobi_eigen(const RealMatrix& a, bool want_vectors = true, int max_sweeps = 100);

/// Ascending eigenvalues of a Hermitian matrix via its real lift. Each lifted
/// pair is reported once.
std::vector<double> herm_eigvals(const ComplexMatrix& m);

/// All 2N eigenvalues of the real lift, ascending, before pairing.
std::vector<double> lifted_eigvals(const ComplexMatrix& m);

inline constexpr double kDefaultClamp = 1e-8;

/// Pseudo-inverse square root U·g(Λ)·U* of a Hermitian PSD matrix, with
/// g(λ) = λ^{-1/2} for λ > clamp·λ_max and 0 otherwise.
ComplexMatrix inv_sqrt_psd(const ComplexMatrix& m, double clamp = kDefaultClamp);

/// Real symmetric variant, keeping the eigendecomposition for callers that
/// need to differentiate through it.
struct InvSqrtResult {
  RealMatrix root;
  SymmetricEigen eigen;
  double threshold = 0.0;  // eigenvalues at or below this were zeroed
};
InvSqrtResult inv_sqrt_psd_sym(const RealMatrix& m, double clamp = kDefaultClamp);

}  // namespace dsheaf
