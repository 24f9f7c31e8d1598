#pragma once

// Sufficiency in the sense of Petz for a discrete statistic. A positive map α
// into the algebra of T has the form α(x) = sum_k tr(ρ_k x) e_k with ρ_k ≥ 0,
// and the states are α-invariant iff sum_k w_θk ρ_k = P[φ_θ] for every θ,
// where w_θk = ‖e_k φ_θ‖². Unital maps add tr ρ_k = 1; contractions
// tr ρ_k ≤ 1. On an abelian range two-positivity and positivity coincide, so
// the PSD cone is the whole positivity constraint.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wsq/linalg.hpp"
#include "wsq/spectral.hpp"

namespace wsq {

struct PetzInstance {
  DiscreteStatistic statistic;
  StateFamily family;
  std::vector<std::vector<double>> weights;  // [state][atom]
  bool unital = true;
};

PetzInstance make_petz_instance(DiscreteStatistic t, StateFamily f, bool unital = true);

enum class TraceMode {
  equal_one,    // unital
  at_most_one,  // contraction
  none,         // no trace constraint at all; not a valid model of α
};

struct PetzOptions {
  int max_iters = 20000;
  double tol = 1e-7;
  double orthogonality_tol = 1e-9;
  int plateau_window = 100;
  double plateau_rel = 1e-12;
  /// Overrides the trace constraint implied by PetzInstance::unital.
  std::optional<TraceMode> trace_override;
};

struct PetzFeasible {
  std::vector<HermitianMatrix> rhos;
  double max_constraint_residual = 0.0;
  double cone_violation = 0.0;  // max(0, −min eigenvalue) over all ρ_k
  int iterations = 0;
};

/// Exact: two states with nonzero overlap cannot both be invariant.
struct PetzInfeasibleOrthogonality {
  std::string left;
  std::string right;
  Complex overlap;
};

/// Heuristic: the alternating-projection residual stopped improving above
/// 10·tol. Not a proof of infeasibility.
struct PetzNumericallyInfeasible {
  double residual_floor = 0.0;
  int iterations = 0;
};

using PetzCertificate =
    std::variant<PetzFeasible, PetzInfeasibleOrthogonality, PetzNumericallyInfeasible>;

struct OrthogonalityViolation {
  std::size_t left = 0;
  std::size_t right = 0;
  Complex overlap;
};

/// First pair θ' ≠ θ'' (family order) with |<φ_θ', φ_θ''>| > tol.
std::optional<OrthogonalityViolation> orthogonality_precheck(const StateFamily& f,
                                                             double tol = 1e-9);

/// Dykstra alternating projections between the invariance equations (solved as
/// a least-squares projection precomputed once) and the PSD cones, from
/// ρ_k = I/d. Throws UndecidedError when max_iters runs out without a verdict.
PetzCertificate petz_feasibility(const PetzInstance& inst, const PetzOptions& options = {});

/// max_θ ‖sum_k w_θk ρ_k − P[φ_θ]‖_max together with the trace-constraint defect.
double petz_constraint_residual(const PetzInstance& inst, const std::vector<HermitianMatrix>& rhos,
                                TraceMode mode);

struct StructuralReport {
  bool pass = true;
  std::vector<std::string> violations;
};

/// Every atom loaded by a state (w_nk > weight_tol) must carry exactly that
/// state's projector (within equality_tol), and no atom may be loaded by two
/// states.
StructuralReport structural_check(const PetzInstance& inst, const PetzFeasible& cert,
                                  double weight_tol = 1e-7, double equality_tol = 1e-6);

/// Runs the weak-sufficiency checker on the instance's statistic and family.
bool petz_implies_weak_check(const PetzInstance& inst, const PetzFeasible& cert);

}  // namespace wsq
