#pragma once

// Coarse-grainings of a weakly sufficient discrete statistic T and the
// statistic minimal with respect to T.
//
// Atoms j, m of T are equivalent (j ~ m) when γ_j = β γ_m for some β ≠ 0.
// A coarse-graining Φ(T) stays weakly sufficient iff every block of merged
// atoms holds mutually equivalent active atoms; merging each equivalence class
// gives the minimal statistic, which exists iff no atom is dead.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "wsq/spectral.hpp"
#include "wsq/sufficiency.hpp"

namespace wsq {

struct EquivalenceOptions {
  /// Rows are proportional when σ_min ≤ rel_tol · σ_max.
  double rel_tol = 1e-8;
  /// Only accept real β.
  bool strict_real = false;
};

struct AtomClass {
  /// Active atom indices grouped by ~, each class ascending, classes ordered
  /// by their smallest member.
  std::vector<std::vector<std::size_t>> classes;
  /// (member, representative) -> β with γ_member = β γ_representative. The
  /// representative is the smallest member of its class.
  std::map<std::pair<std::size_t, std::size_t>, Complex> witnesses;
  /// Worst σ_min/σ_max over all pairs inside a class (post hoc transitivity).
  double transitivity_residual = 0.0;
};

/// σ_min/σ_max of the 2 x |Θ| matrix with rows γ_j, γ_m. Zero rows give 1.
double proportionality_defect(const GammaTable& g, std::size_t j, std::size_t m);

/// j ~ m, with the ratio β written to *beta when non-null.
bool atoms_equivalent(const GammaTable& g, std::size_t j, std::size_t m,
                      const EquivalenceOptions& options = {}, Complex* beta = nullptr);

AtomClass equivalence_classes(const GammaTable& g, const EquivalenceOptions& options = {});

/// Whether Φ(T) is weakly sufficient, decided from the atom classes of T.
/// Throws PreconditionError when T itself is not weakly sufficient.
bool check_coarse_sufficient(const DiscreteStatistic& t, const StateFamily& f,
                             const CoarseMap& phi, const SufficiencyOptions& options = {},
                             const EquivalenceOptions& equivalence = {});

struct MinimalResult {
  std::optional<DiscreteStatistic> statistic;  // S = sum_m m q_m
  std::optional<std::size_t> dead_atom;        // atom with dim{e_k φ_θ} = 0
  AtomClass atom_classes;

  bool exists() const { return statistic.has_value(); }
};

/// Throws PreconditionError when T is not weakly sufficient or the family is
/// trivial (its span has dimension below two).
MinimalResult minimal_statistic(const DiscreteStatistic& t, const StateFamily& f,
                                const SufficiencyOptions& options = {},
                                const EquivalenceOptions& equivalence = {});

/// Ψ with S = Ψ(U), as the S-eigenvalue assigned to each atom of U, when every
/// atom of U lies under exactly one atom of S.
std::optional<SpectralFunction> is_function_of(const DiscreteStatistic& s,
                                               const DiscreteStatistic& u, double tol = 1e-8);

inline constexpr std::size_t max_enumerable_atoms = 9;

/// Walks all set partitions of {0, .., n-1} as restricted growth strings.
class SetPartitionEnumerator {
 public:
  explicit SetPartitionEnumerator(std::size_t n);
  /// Block index per element for the next partition, or nullopt when done.
  std::optional<std::vector<std::size_t>> next();

 private:
  std::size_t n_;
  std::vector<std::size_t> rgs_;
  std::vector<std::size_t> prefix_max_;
  bool started_ = false;
  bool done_ = false;
};

/// One CoarseMap per set partition of T's atoms, block values 1..#blocks.
class CoarseGrainingEnumerator {
 public:
  /// Throws PreconditionError when T has more than min(max_atoms, 9) atoms.
  CoarseGrainingEnumerator(const DiscreteStatistic& t, std::size_t max_atoms);
  std::optional<CoarseMap> next();

 private:
  SetPartitionEnumerator partitions_;
};

std::uint64_t bell_number(std::size_t n);

/// T_n = λ_n (e_dead + e_n) + sum_{k ∉ {dead, n}} λ_k e_k for every n ≠ dead.
std::vector<DiscreteStatistic> dead_atom_merges(const DiscreteStatistic& t, std::size_t dead);

}  // namespace wsq
