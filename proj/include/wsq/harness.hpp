#pragma once

// Seeded instance generators with planted structure, a brute-force weak
// sufficiency oracle, and the property suite. Every generator draws from
// std::mt19937_64 seeded with GeneratorSpec::seed.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wsq/io.hpp"
#include "wsq/spectral.hpp"

namespace wsq {

enum class Flavor {
  real_vectors,        // real states; the Gram matrix is real
  complex_vectors,     // generic complex states
  orthogonal_planted,  // pairwise orthogonal states
  atom_planted,        // states supported on pairwise disjoint sets of atoms
  phase_obstructed,    // contains a triangle whose Gram phases close to π/4
  sufficient_planted,  // T weakly sufficient, atom classes planted
};

std::string flavor_name(Flavor f);
std::optional<Flavor> flavor_from_name(const std::string& name);

struct GeneratorSpec {
  std::size_t dim = 4;
  std::size_t family_size = 3;
  Flavor flavor = Flavor::real_vectors;
  std::uint64_t seed = 0;
  /// Number of atoms of T; 0 picks one from the seed.
  std::size_t atoms = 0;
  /// sufficient_planted only: leave one atom orthogonal to every state.
  bool dead_atom = false;
};

inline constexpr std::size_t max_generator_dim = 32;
inline constexpr std::size_t max_generator_family = 8;

/// Throws PreconditionError for parameters the flavor cannot honour.
Instance generate(const GeneratorSpec& spec);

inline constexpr std::size_t max_brute_force_states = 4;
inline constexpr std::size_t max_brute_force_atoms = 6;

/// Per-atom rank test followed by a phase grid search (polished locally) over
/// the atom-level constraints. Shares no code path with the union-find
/// checker. Throws PreconditionError outside the size guards.
bool brute_force_weak_sufficiency(const DiscreteStatistic& t, const StateFamily& f,
                                  int phase_steps = 72);

/// Deliberate bugs the suite must catch.
struct Mutations {
  bool phase_two_pi = false;  // align versions mod 2π instead of mod π
  bool skip_rank = false;     // checker ignores the per-atom rank test
  bool drop_trace = false;    // Petz solver drops the trace constraint
};

struct PropertyResult {
  std::string name;
  bool passed = true;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string message;
  double seconds = 0.0;
  /// Shrunk failing instance, with the seed of the instance it came from.
  std::optional<nlohmann::json> counterexample;
};

struct PropertyReport {
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::vector<PropertyResult> results;

  bool passed() const;
  nlohmann::json to_json() const;
};

/// `count` instances per property. count == 0 gives an empty, passing report.
PropertyReport run_property_suite(std::uint64_t seed, std::size_t count,
                                  const Mutations& mutations = {});

/// Greedy shrinking: drop states, then merge atoms, then round state entries
/// to 3 decimals, keeping each step only while `fails` still holds.
Instance shrink_instance(Instance inst, const std::function<bool(const Instance&)>& fails);

}  // namespace wsq
