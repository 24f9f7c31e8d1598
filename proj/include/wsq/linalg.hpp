#pragma once

// Dense complex linear algebra at desk scale: Hermitian eigensolver (cyclic
// Jacobi), Gram matrices, numerical rank, Gram-Schmidt with coefficient
// tracking, and projection onto the PSD cone.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace wsq {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

/// Row-major dense complex matrix.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}
  CMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> data);

  static CMatrix identity(std::size_t n);
  static CMatrix diagonal(std::span<const double> values);
  /// |v><v|
  static CMatrix outer(std::span<const Complex> v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  const std::vector<Complex>& data() const { return data_; }

  CMatrix adjoint() const;
  double max_abs() const;
  double frobenius() const;
  Complex trace() const;
  bool all_finite() const;

  CMatrix& operator+=(const CMatrix& other);
  CMatrix& operator-=(const CMatrix& other);
  CMatrix& operator*=(Complex s);

  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator*(CMatrix a, Complex s) { return a *= s; }
  friend CMatrix operator*(Complex s, CMatrix a) { return a *= s; }
  friend CMatrix operator*(const CMatrix& a, const CMatrix& b);
  friend CVector operator*(const CMatrix& a, std::span<const Complex> v);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// Entrywise max |a - b|. Shapes must agree.
double max_abs_diff(const CMatrix& a, const CMatrix& b);

/// Square matrix that was Hermitian (within tolerance) on ingest. The stored
/// matrix is the symmetrized (M + M*)/2.
class HermitianMatrix {
 public:
  static constexpr double default_tol = 1e-10;

  HermitianMatrix() = default;
  /// Throws InvariantError when ‖M − M*‖_max > tol · max(1, ‖M‖_max) or an
  /// entry is not finite; DimensionError when M is not square.
  explicit HermitianMatrix(const CMatrix& m, double tol = default_tol);

  std::size_t dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

 private:
  CMatrix m_;
};

// Vector helpers. inner() is linear in the first argument and conjugate-linear
// in the second: <u, v> = sum_i u_i conj(v_i).
Complex inner(std::span<const Complex> u, std::span<const Complex> v);
double norm(std::span<const Complex> v);
CVector scaled(std::span<const Complex> v, Complex s);
CVector add(std::span<const Complex> u, std::span<const Complex> v);
CVector subtract(std::span<const Complex> u, std::span<const Complex> v);
double max_abs_diff(std::span<const Complex> u, std::span<const Complex> v);
CVector basis_vector(std::size_t dim, std::size_t index);

struct EigenDecomposition {
  std::vector<double> values;    // ascending
  std::vector<CVector> vectors;  // vectors[i] pairs with values[i]
  int sweeps = 0;
};

inline constexpr std::size_t max_eig_dim = 64;

/// Cyclic (row-order) Jacobi eigensolver. Iterates until the off-diagonal
/// Frobenius norm is at most tol · ‖M‖_F. Throws EigenError after max_sweeps
/// and DimensionError above max_eig_dim.
EigenDecomposition hermitian_eig(const HermitianMatrix& m, double tol = 1e-14,
                                 int max_sweeps = 100);

/// V diag(values) V*
CMatrix reassemble(const EigenDecomposition& eig);

/// G[j][k] = inner(vs[j], vs[k]). Throws on empty input or mixed dimensions.
CMatrix gram_matrix(std::span<const CVector> vs);

/// Number of Gram eigenvalues above tol · max(1, largest eigenvalue).
std::size_t numerical_rank(std::span<const CVector> vs, double tol = 1e-8);

struct GramSchmidtResult {
  std::vector<CVector> ortho;
  /// Lower triangular: ortho[n] = sum_{j<=n} coeffs(n, j) * vs[j].
  CMatrix coeffs;
};

/// Throws RankError naming the first index whose residual after projection
/// falls below tol relative to its own norm.
GramSchmidtResult gram_schmidt(std::span<const CVector> vs, double tol = 1e-8);

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues clipped to zero.
HermitianMatrix psd_project(const HermitianMatrix& m);

/// Moore-Penrose pseudo-inverse through the eigendecomposition of the smaller
/// Gram product (A A* or A* A). Gram eigenvalues below rel_tol · λ_max, i.e.
/// σ² below rel_tol · σ_max², are treated as zero. Not subject to max_eig_dim.
CMatrix pseudo_inverse(const CMatrix& a, double rel_tol = 1e-12);

namespace detail {
EigenDecomposition jacobi_eig(const CMatrix& hermitian, double tol, int max_sweeps);
}

}  // namespace wsq
