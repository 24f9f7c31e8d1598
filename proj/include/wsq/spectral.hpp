#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wsq/linalg.hpp"

namespace wsq {

/// One spectral atom: eigenvalue and its eigenprojection.
struct Atom {
  double eigenvalue = 0.0;
  HermitianMatrix projection;
};

/// T = sum_k λ_k e_k with {e_k} a partition of the identity and the λ_k
/// distinct. Atoms are kept in ascending eigenvalue order.
class DiscreteStatistic {
 public:
  static constexpr double default_tol = 1e-8;

  DiscreteStatistic() = default;
  /// Validates idempotency, mutual orthogonality, completeness and distinct
  /// eigenvalues; throws InvariantError naming the defect.
  explicit DiscreteStatistic(std::vector<Atom> atoms, double tol = default_tol);

  std::size_t dim() const { return atoms_.empty() ? 0 : atoms_.front().projection.dim(); }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const Atom& atom(std::size_t k) const { return atoms_.at(k); }
  std::vector<double> eigenvalues() const;
  /// Index of the atom whose eigenvalue equals lambda (within tol), or npos.
  std::size_t find(double lambda, double tol = 0.0) const;
  /// sum_k λ_k e_k
  CMatrix matrix() const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<Atom> atoms_;
};

/// Labeled unit vectors φ_θ of a common dimension. Order is insertion order.
class StateFamily {
 public:
  static constexpr double default_tol = 1e-9;

  StateFamily() = default;
  /// Throws InvariantError on duplicate labels, non-unit norms, non-finite
  /// entries, or mixed dimensions. Messages name the offending state.
  StateFamily(std::vector<std::string> labels, std::vector<CVector> vectors,
              double tol = default_tol);

  std::size_t size() const { return vectors_.size(); }
  std::size_t dim() const { return vectors_.empty() ? 0 : vectors_.front().size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<CVector>& vectors() const { return vectors_; }
  const CVector& vector(std::size_t i) const { return vectors_.at(i); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  std::size_t index_of(const std::string& label) const;

 private:
  std::vector<std::string> labels_;
  std::vector<CVector> vectors_;
};

/// Value assigned to every atom of a statistic, by atom index. This is the
/// finite form of a real Borel function on the spectrum.
using SpectralFunction = std::vector<double>;

/// Coarse-graining Φ: atom k of T is sent to values[k].
struct CoarseMap {
  SpectralFunction values;
};

struct CoarseResult {
  DiscreteStatistic statistic;
  /// partition[i] lists the atoms of T merged into atom i of the result.
  std::vector<std::vector<std::size_t>> partition;
};

/// components[k][θ] = e_k φ_θ, weights[θ][k] = ‖e_k φ_θ‖².
struct AtomProjectionTable {
  std::vector<std::vector<CVector>> components;
  std::vector<std::vector<double>> weights;
};

/// Eigenvalues closer than group_tol are merged into one atom. A negative
/// group_tol selects 1e-9 · spectral radius.
DiscreteStatistic statistic_from_matrix(const HermitianMatrix& m, double group_tol = -1.0);

DiscreteStatistic statistic_from_eigen(std::vector<double> eigenvalues,
                                       std::vector<HermitianMatrix> projections,
                                       double tol = DiscreteStatistic::default_tol);

/// Atoms with equal image values (exact equality) are summed.
CoarseResult apply_coarse(const DiscreteStatistic& t, const CoarseMap& phi);

AtomProjectionTable project_states(const DiscreteStatistic& t, const StateFamily& f);

/// sum_k f(λ_k) e_k v
CVector evaluate_function_on_statistic(const DiscreteStatistic& t, const SpectralFunction& f,
                                       std::span<const Complex> v);

}  // namespace wsq
