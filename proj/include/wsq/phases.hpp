#pragma once

// Version selection: choose unit-modulus phases c_θ so that a set of prescribed
// inner products become real. Each constraint (θ', θ'', v) asks for
// c_θ' · conj(c_θ'') · v ∈ ℝ, i.e. arg c_θ' − arg c_θ'' + arg v ≡ 0 (mod π).

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wsq/linalg.hpp"

namespace wsq {

struct PhaseConstraint {
  std::string left;
  std::string right;
  Complex value;
};

struct VersionAssignment {
  std::map<std::string, Complex> phases;

  Complex phase(const std::string& label) const;
};

/// The mod-π group is the correct one ("real", either sign). two_pi asks for
/// positive reals and exists only so tests can exercise a wrong solver.
enum class PhaseModulus { pi, two_pi };

struct PhaseOptions {
  double angle_tol = 1e-6;
  PhaseModulus modulus = PhaseModulus::pi;
};

struct PhaseObstruction {
  std::vector<PhaseConstraint> cycle;
  /// Signed angular defect around the cycle, reduced to (−M/2, M/2].
  double defect = 0.0;
};

struct AlignResult {
  std::optional<VersionAssignment> versions;
  std::optional<PhaseObstruction> obstruction;

  bool feasible() const { return versions.has_value(); }
};

/// Union-find over labels carrying angular offsets. Components are rooted at
/// their lexicographically smallest label, whose phase is 1. Throws
/// PreconditionError for unknown labels or an exactly zero constraint value.
AlignResult align_phases(const std::vector<PhaseConstraint>& constraints,
                         const std::vector<std::string>& labels,
                         const PhaseOptions& options = {});

/// Signed defect of a closed walk through `cycle` (each constraint traversed
/// once, in order), reduced to (−M/2, M/2]. nullopt when the constraints do
/// not chain into a closed walk. A nonzero defect proves infeasibility.
std::optional<double> cycle_defect(const std::vector<PhaseConstraint>& cycle,
                                   PhaseModulus modulus = PhaseModulus::pi);

/// |Im(c' conj(c'') v)| / |v|
double normalized_residual(const PhaseConstraint& c, const VersionAssignment& versions);
double max_normalized_residual(const std::vector<PhaseConstraint>& constraints,
                               const VersionAssignment& versions);

struct OracleResult {
  VersionAssignment versions;
  double max_residual = 0.0;
};

inline constexpr std::size_t max_oracle_labels = 5;

/// Exhaustive search over phases {2πj/steps}; the first label is pinned to 1
/// (a global phase changes no residual). Throws PreconditionError above
/// max_oracle_labels.
OracleResult oracle_align(const std::vector<PhaseConstraint>& constraints,
                          const std::vector<std::string>& labels, int steps);

/// Levenberg-Marquardt on the residuals sin(φ' − φ'' + arg v), started from
/// `start`. Used after oracle_align to turn a grid point into a near-exact
/// solution when one exists nearby.
OracleResult polish_phases(const std::vector<PhaseConstraint>& constraints,
                           const std::vector<std::string>& labels,
                           const VersionAssignment& start, int iterations = 100);

}  // namespace wsq
