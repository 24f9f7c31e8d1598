#pragma once

// Weak sufficiency of a discrete statistic T = sum_k λ_k e_k for a family of
// vector states: T is weakly sufficient when there are a vector χ, versions
// φ̃_θ = c_θ φ_θ and real functions Φ_θ on the spectrum with φ̃_θ = Φ_θ(T) χ.
//
// For discrete T this holds iff every atom sees a family {e_k φ_θ} of dimension
// at most one and some choice of versions makes all <e_k φ̃_θ', φ̃_θ''> real.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wsq/linalg.hpp"
#include "wsq/phases.hpp"
#include "wsq/spectral.hpp"

namespace wsq {

struct SufficiencyOptions {
  double rank_tol = 1e-8;
  double angle_tol = 1e-6;
  /// Pairs with |<e_k φ', φ''>| at or below this are ignored.
  double zero_tol = 1e-10;
  /// false turns off the per-atom rank test (a deliberately wrong checker
  /// used by the mutation suite).
  bool enforce_rank = true;
  PhaseModulus modulus = PhaseModulus::pi;
};

/// e_k φ_θ = γ_k(θ) ξ_k on every active atom.
struct GammaTable {
  std::vector<bool> active;                  // per atom
  std::vector<CVector> xi;                   // per atom; empty when inactive
  std::vector<std::vector<Complex>> gamma;   // [atom][state]
};

struct WitnessFactorization {
  CVector chi;
  std::map<std::string, SpectralFunction> functions;
  VersionAssignment versions;
};

struct RankViolation {
  std::size_t atom = 0;
  double eigenvalue = 0.0;
  std::size_t dim = 0;
};

struct PhaseViolation {
  PhaseObstruction obstruction;
};

using Violation = std::variant<RankViolation, PhaseViolation>;

struct SufficiencyVerdict {
  bool sufficient = false;
  std::optional<WitnessFactorization> witness;
  std::vector<Violation> violations;
  /// Present whenever the rank test passed.
  std::optional<GammaTable> gamma;
};

/// Per-atom ranks and representatives. Atoms whose rank exceeds one (when the
/// rank test is enforced) are reported through `violations`, and the table is
/// only returned when there are none.
struct GammaExtraction {
  std::optional<GammaTable> table;
  std::vector<RankViolation> violations;
};

GammaExtraction extract_gamma(const DiscreteStatistic& t, const StateFamily& f,
                              const SufficiencyOptions& options = {});

SufficiencyVerdict check_weak_sufficiency(const DiscreteStatistic& t, const StateFamily& f,
                                          const SufficiencyOptions& options = {});

struct WitnessCheck {
  bool ok = false;
  std::vector<double> residuals;  // per state, family order
  double max_residual = 0.0;
};

/// ‖Φ_θ(T) χ − c_θ φ_θ‖ for every θ. Malformed witnesses (missing functions or
/// versions, wrong sizes) yield ok == false with infinite residuals.
WitnessCheck verify_witness(const DiscreteStatistic& t, const StateFamily& f,
                            const WitnessFactorization& w, double tol = 1e-9);

struct ConstructedStatistic {
  DiscreteStatistic statistic;
  WitnessFactorization witness;
  VersionAssignment versions;             // making the full Gram matrix real
  std::vector<std::string> basis_labels;  // the independent subfamily used
};

struct ExistenceResult {
  std::optional<ConstructedStatistic> constructed;
  std::optional<PhaseObstruction> obstruction;

  bool exists() const { return constructed.has_value(); }
};

/// Phase-aligns the Gram matrix, Gram-Schmidts a maximal independent subfamily
/// (greedy, ascending label) and returns T = sum_n n P[ξ_n] (+ 0 on the
/// complement). An obstruction means no weakly sufficient statistic exists.
ExistenceResult exists_weakly_sufficient(const StateFamily& f,
                                         const SufficiencyOptions& options = {});

/// Constraints making the full Gram matrix real (pairs with |G| > zero_tol).
std::vector<PhaseConstraint> gram_constraints(const StateFamily& f, double zero_tol = 1e-10);

/// Constraints <e_k φ_θ', φ_θ''> for θ' < θ'' on every atom, zero pairs dropped.
std::vector<PhaseConstraint> atom_constraints(const DiscreteStatistic& t, const StateFamily& f,
                                              double zero_tol = 1e-10);

}  // namespace wsq
