#include "wsq/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "wsq/errors.hpp"

namespace wsq {

CMatrix::CMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("CMatrix: entry count does not match rows*cols");
  }
}

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::diagonal(std::span<const double> values) {
  CMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

CMatrix CMatrix::outer(std::span<const Complex> v) {
  CMatrix m(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[i] * std::conj(v[j]);
  return m;
}

CMatrix CMatrix::adjoint() const {
  CMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
  return out;
}

double CMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& z : data_) m = std::max(m, std::abs(z));
  return m;
}

double CMatrix::frobenius() const {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

Complex CMatrix::trace() const {
  Complex t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

bool CMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

CMatrix& CMatrix::operator+=(const CMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw DimensionError("CMatrix +=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw DimensionError("CMatrix -=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

CMatrix& CMatrix::operator*=(Complex s) {
  for (auto& z : data_) z *= s;
  return *this;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  if (a.cols_ != b.rows_) throw DimensionError("CMatrix *: shape mismatch");
  CMatrix out(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

CVector operator*(const CMatrix& a, std::span<const Complex> v) {
  if (a.cols_ != v.size()) throw DimensionError("CMatrix * vector: shape mismatch");
  CVector out(a.rows_);
  for (std::size_t i = 0; i < a.rows_; ++i) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < a.cols_; ++j) s += a(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

HermitianMatrix::HermitianMatrix(const CMatrix& m, double tol) {
  if (!m.square()) throw DimensionError("HermitianMatrix: matrix is not square");
  if (!m.all_finite()) throw InvariantError("HermitianMatrix: non-finite entry");
  const double scale = std::max(1.0, m.max_abs());
  const CMatrix adj = m.adjoint();
  const double defect = max_abs_diff(m, adj);
  if (defect > tol * scale) {
    std::ostringstream os;
    os << "HermitianMatrix: not Hermitian (max |M - M*| = " << defect << ")";
    throw InvariantError(os.str());
  }
  m_ = (m + adj) * Complex(0.5);
}

Complex inner(std::span<const Complex> u, std::span<const Complex> v) {
  if (u.size() != v.size()) throw DimensionError("inner: dimension mismatch");
  Complex s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * std::conj(v[i]);
  return s;
}

double norm(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

CVector scaled(std::span<const Complex> v, Complex s) {
  CVector out(v.begin(), v.end());
  for (auto& z : out) z *= s;
  return out;
}

CVector add(std::span<const Complex> u, std::span<const Complex> v) {
  if (u.size() != v.size()) throw DimensionError("add: dimension mismatch");
  CVector out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] + v[i];
  return out;
}

CVector subtract(std::span<const Complex> u, std::span<const Complex> v) {
  if (u.size() != v.size()) throw DimensionError("subtract: dimension mismatch");
  CVector out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] - v[i];
  return out;
}

double max_abs_diff(std::span<const Complex> u, std::span<const Complex> v) {
  if (u.size() != v.size()) throw DimensionError("max_abs_diff: dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - v[i]));
  return m;
}

CVector basis_vector(std::size_t dim, std::size_t index) {
  CVector v(dim);
  v.at(index) = 1.0;
  return v;
}

namespace detail {

EigenDecomposition jacobi_eig(const CMatrix& hermitian, double tol, int max_sweeps) {
  const std::size_t n = hermitian.rows();
  CMatrix a = hermitian;
  CMatrix v = CMatrix::identity(n);
  EigenDecomposition out;

  const double fnorm = a.frobenius();
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };

  int sweep = 0;
  if (fnorm > 0.0) {
    while (off_norm() > tol * fnorm) {
      if (sweep == max_sweeps) {
        std::ostringstream os;
        os << "hermitian_eig: no convergence after " << max_sweeps
           << " sweeps (off-diagonal norm " << off_norm() << ")";
        throw EigenError(os.str());
      }
      ++sweep;
      for (std::size_t p = 0; p + 1 < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
          const double mag = std::abs(a(p, q));
          if (mag == 0.0) continue;
          const double app = a(p, p).real();
          const double aqq = a(q, q).real();
          // Past the first few sweeps, entries far below both diagonal
          // neighbours cannot move the spectrum; drop them.
          if (sweep > 4 && mag < 1e-18 * std::abs(app) && mag < 1e-18 * std::abs(aqq)) {
            a(p, q) = a(q, p) = 0.0;
            continue;
          }
          const Complex u = a(p, q) / mag;  // a_pq = |a_pq| u
          const double theta = (aqq - app) / (2.0 * mag);
          double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          // G = diag(1, conj(u)) * [[c, s], [-s, c]] on the (p, q) plane.
          const Complex gqp = -s * std::conj(u);
          const Complex gqq = c * std::conj(u);
          for (std::size_t k = 0; k < n; ++k) {  // A <- A G
            const Complex akp = a(k, p), akq = a(k, q);
            a(k, p) = c * akp + gqp * akq;
            a(k, q) = s * akp + gqq * akq;
          }
          for (std::size_t k = 0; k < n; ++k) {  // A <- G* A
            const Complex apk = a(p, k), aqk = a(q, k);
            a(p, k) = c * apk + std::conj(gqp) * aqk;
            a(q, k) = s * apk + std::conj(gqq) * aqk;
          }
          a(p, q) = a(q, p) = 0.0;
          a(p, p) = a(p, p).real();
          a(q, q) = a(q, q).real();
          for (std::size_t k = 0; k < n; ++k) {  // V <- V G
            const Complex vkp = v(k, p), vkq = v(k, q);
            v(k, p) = c * vkp + gqp * vkq;
            v(k, q) = s * vkp + gqq * vkq;
          }
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a(i, i).real() < a(j, j).real();
  });
  out.sweeps = sweep;
  for (std::size_t idx : order) {
    out.values.push_back(a(idx, idx).real());
    CVector col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v(k, idx);
    out.vectors.push_back(std::move(col));
  }
  return out;
}

}  // namespace detail

EigenDecomposition hermitian_eig(const HermitianMatrix& m, double tol, int max_sweeps) {
  if (m.dim() > max_eig_dim) {
    std::ostringstream os;
    os << "hermitian_eig: dimension " << m.dim() << " exceeds " << max_eig_dim;
    throw DimensionError(os.str());
  }
  return detail::jacobi_eig(m.matrix(), tol, max_sweeps);
}

CMatrix reassemble(const EigenDecomposition& eig) {
  const std::size_t n = eig.vectors.empty() ? 0 : eig.vectors.front().size();
  CMatrix out(n, n);
  for (std::size_t e = 0; e < eig.values.size(); ++e) {
    const auto& vec = eig.vectors[e];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out(i, j) += eig.values[e] * vec[i] * std::conj(vec[j]);
  }
  return out;
}

CMatrix gram_matrix(std::span<const CVector> vs) {
  if (vs.empty()) throw DimensionError("gram_matrix: empty list");
  const std::size_t n = vs.size();
  for (const auto& v : vs)
    if (v.size() != vs.front().size())
      throw DimensionError("gram_matrix: vectors of different dimension");
  CMatrix g(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    g(j, j) = std::norm(norm(vs[j]));
    for (std::size_t k = j + 1; k < n; ++k) {
      g(j, k) = inner(vs[j], vs[k]);
      g(k, j) = std::conj(g(j, k));
    }
  }
  return g;
}

std::size_t numerical_rank(std::span<const CVector> vs, double tol) {
  if (vs.empty()) return 0;
  const auto eig = detail::jacobi_eig(gram_matrix(vs), 1e-15, 100);
  const double largest = eig.values.back();
  const double cutoff = tol * std::max(1.0, largest);
  return static_cast<std::size_t>(std::count_if(
      eig.values.begin(), eig.values.end(), [&](double l) { return l > cutoff; }));
}

GramSchmidtResult gram_schmidt(std::span<const CVector> vs, double tol) {
  const std::size_t n = vs.size();
  GramSchmidtResult out;
  out.coeffs = CMatrix(n, n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    if (vs[idx].size() != vs.front().size())
      throw DimensionError("gram_schmidt: vectors of different dimension");
    CVector w = vs[idx];
    std::vector<Complex> coeff(n);
    coeff[idx] = 1.0;
    // Two passes of modified Gram-Schmidt keep orthogonality at machine level.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < idx; ++j) {
        const Complex r = inner(w, out.ortho[j]);
        for (std::size_t k = 0; k < w.size(); ++k) w[k] -= r * out.ortho[j][k];
        for (std::size_t k = 0; k <= j; ++k) coeff[k] -= r * out.coeffs(j, k);
      }
    }
    const double len = norm(w);
    const double ref = norm(vs[idx]);
    if (!(len > tol * ref) || ref == 0.0) {
      std::ostringstream os;
      os << "gram_schmidt: vector " << idx << " is linearly dependent on its predecessors";
      throw RankError(os.str(), idx);
    }
    for (auto& z : w) z /= len;
    for (std::size_t k = 0; k <= idx; ++k) out.coeffs(idx, k) = coeff[k] / len;
    out.ortho.push_back(std::move(w));
  }
  return out;
}

HermitianMatrix psd_project(const HermitianMatrix& m) {
  auto eig = hermitian_eig(m);
  for (auto& l : eig.values) l = std::max(l, 0.0);
  return HermitianMatrix(reassemble(eig), 1e-8);
}

CMatrix pseudo_inverse(const CMatrix& a, double rel_tol) {
  const bool wide = a.rows() <= a.cols();
  const CMatrix ah = a.adjoint();
  const CMatrix g = wide ? a * ah : ah * a;
  const CMatrix gh = HermitianMatrix(g, 1e-8).matrix();
  const auto eig = detail::jacobi_eig(gh, 1e-15, 200);
  const std::size_t n = gh.rows();
  const double largest = eig.values.empty() ? 0.0 : eig.values.back();
  CMatrix ginv(n, n);
  if (largest > 0.0) {
    for (std::size_t e = 0; e < n; ++e) {
      const double l = eig.values[e];
      if (l <= rel_tol * largest) continue;
      const auto& vec = eig.vectors[e];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) ginv(i, j) += vec[i] * std::conj(vec[j]) / l;
    }
  }
  return wide ? ah * ginv : ginv * ah;
}

}  // namespace wsq
