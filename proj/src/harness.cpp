#include "wsq/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "wsq/errors.hpp"
#include "wsq/minimality.hpp"
#include "wsq/petz.hpp"
#include "wsq/phases.hpp"
#include "wsq/sufficiency.hpp"

namespace wsq {

namespace {

using Rng = std::mt19937_64;

Complex gaussian_complex(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(rng), n(rng)};
}

CVector random_unit_vector(std::size_t d, Rng& rng, bool real) {
  std::normal_distribution<double> n(0.0, 1.0);
  CVector v(d);
  for (auto& z : v) z = real ? Complex(n(rng), 0.0) : gaussian_complex(rng);
  return scaled(v, 1.0 / norm(v));
}

std::vector<CVector> random_basis(std::size_t d, Rng& rng) {
  std::vector<CVector> vs;
  for (std::size_t i = 0; i < d; ++i) vs.push_back(random_unit_vector(d, rng, false));
  return gram_schmidt(vs).ortho;
}

Complex random_phase(Rng& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  return std::polar(1.0, angle(rng));
}

// T with `m` atoms over a random orthonormal basis; blocks[k] lists the basis
// vectors spanning atom k (eigenvalue k + 1).
struct PlantedStatistic {
  DiscreteStatistic statistic;
  std::vector<CVector> basis;
  std::vector<std::vector<std::size_t>> blocks;
};

PlantedStatistic random_statistic(std::size_t d, std::size_t m, Rng& rng) {
  PlantedStatistic out;
  out.basis = random_basis(d, rng);
  out.blocks.resize(m);
  std::vector<std::size_t> order(d);
  for (std::size_t i = 0; i < d; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  for (std::size_t i = 0; i < d; ++i) out.blocks[i < m ? i : pick(rng)].push_back(order[i]);
  std::vector<Atom> atoms;
  for (std::size_t k = 0; k < m; ++k) {
    CMatrix p(d, d);
    for (std::size_t i : out.blocks[k]) p += CMatrix::outer(out.basis[i]);
    atoms.push_back({static_cast<double>(k + 1), HermitianMatrix(p, 1e-8)});
  }
  out.statistic = DiscreteStatistic(std::move(atoms));
  return out;
}

// Random unit vector inside the range of atom k.
CVector vector_in_block(const PlantedStatistic& t, std::size_t k, Rng& rng) {
  const std::size_t d = t.basis.size();
  CVector v(d, 0.0);
  for (std::size_t i : t.blocks[k]) v = add(v, scaled(t.basis[i], gaussian_complex(rng)));
  return scaled(v, 1.0 / norm(v));
}

std::vector<std::string> make_labels(std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("s" + std::to_string(i));
  return labels;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError("generate: " + what);
}

Instance generate_sufficient(const GeneratorSpec& spec, std::size_t m, Rng& rng) {
  const std::size_t n = spec.family_size;
  require(n >= 2, "sufficient_planted needs at least two states");
  require(m >= (spec.dead_atom ? 3u : 2u), "too few atoms for sufficient_planted");
  const auto t = random_statistic(spec.dim, m, rng);
  const std::size_t live = spec.dead_atom ? m - 1 : m;
  std::uniform_int_distribution<std::size_t> proto_count(2, std::min<std::size_t>(live, 3));
  const std::size_t protos = proto_count(rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> proto(protos, std::vector<double>(n));
  for (auto& row : proto)
    for (auto& x : row) x = normal(rng);
  std::uniform_int_distribution<std::size_t> pick(0, protos - 1);
  std::uniform_real_distribution<double> magnitude(0.3, 1.5);

  std::vector<CVector> states(n, CVector(spec.dim, 0.0));
  for (std::size_t k = 0; k < live; ++k) {
    const std::size_t which = k < protos ? k : pick(rng);
    const Complex beta = magnitude(rng) * random_phase(rng);
    const CVector xi = vector_in_block(t, k, rng);
    for (std::size_t th = 0; th < n; ++th)
      states[th] = add(states[th], scaled(xi, beta * proto[which][th]));
  }
  for (auto& s : states) s = scaled(s, random_phase(rng) / norm(s));
  return {t.statistic, StateFamily(make_labels(n), states)};
}

Instance generate_atom_planted(const GeneratorSpec& spec, std::size_t m, Rng& rng) {
  const std::size_t n = spec.family_size;
  require(m >= n, "atom_planted needs at least one atom per state");
  const auto t = random_statistic(spec.dim, m, rng);
  std::vector<std::size_t> order(m);
  for (std::size_t k = 0; k < m; ++k) order[k] = k;
  std::shuffle(order.begin(), order.end(), rng);
  // State i owns order[i], and order[n + i] as a second atom when available.
  std::uniform_real_distribution<double> split(0.15, 0.85);
  std::vector<CVector> states;
  for (std::size_t i = 0; i < n; ++i) {
    CVector v = vector_in_block(t, order[i], rng);
    if (n + i < m) {
      const double w = split(rng);
      v = add(scaled(v, std::sqrt(w)),
              scaled(vector_in_block(t, order[n + i], rng), std::sqrt(1.0 - w) * random_phase(rng)));
    }
    states.push_back(scaled(v, 1.0 / norm(v)));
  }
  return {t.statistic, StateFamily(make_labels(n), states)};
}

Instance generate_phase_obstructed(const GeneratorSpec& spec, std::size_t m, Rng& rng) {
  const std::size_t n = spec.family_size;
  require(spec.dim >= 3 && n >= 3, "phase_obstructed needs dimension and family size >= 3");
  const auto t = random_statistic(spec.dim, m, rng);
  const auto q = random_basis(spec.dim, rng);
  const double r = 1.0 / std::sqrt(2.0);
  const Complex twist = std::polar(1.0, std::numbers::pi / 4.0);
  std::vector<CVector> states{scaled(add(q[0], q[1]), r), scaled(add(q[1], q[2]), r),
                              scaled(add(q[0], scaled(q[2], twist)), r)};
  for (std::size_t i = 3; i < n; ++i) states.push_back(random_unit_vector(spec.dim, rng, false));
  for (auto& s : states) s = scaled(s, random_phase(rng));
  return {t.statistic, StateFamily(make_labels(n), states)};
}

// Atom-level constraints computed directly from the projections.
std::vector<PhaseConstraint> direct_atom_constraints(const DiscreteStatistic& t,
                                                     const StateFamily& f, double zero_tol) {
  std::vector<PhaseConstraint> out;
  for (const auto& atom : t.atoms()) {
    std::vector<CVector> comps;
    for (const auto& v : f.vectors()) comps.push_back(atom.projection.matrix() * std::span<const Complex>(v));
    for (std::size_t a = 0; a < f.size(); ++a)
      for (std::size_t b = a + 1; b < f.size(); ++b) {
        const Complex v = inner(comps[a], f.vector(b));
        if (std::abs(v) > zero_tol) out.push_back({f.label(a), f.label(b), v});
      }
  }
  return out;
}

bool oracle_feasible(const std::vector<PhaseConstraint>& constraints,
                     const std::vector<std::string>& labels, int steps) {
  if (constraints.empty()) return true;
  // Keep the grid near 10^6 points; the polish step recovers the precision.
  if (labels.size() >= 5) steps = std::min(steps, 30);
  const auto coarse = oracle_align(constraints, labels, steps);
  const auto fine = polish_phases(constraints, labels, coarse.versions, 200);
  return fine.max_residual <= 1e-6;
}

// ---------------------------------------------------------------------------
// Property suite

struct Context {
  Mutations mutations;
  SufficiencyOptions sufficiency;
  PetzOptions petz;
};

Context make_context(const Mutations& m) {
  Context c;
  c.mutations = m;
  if (m.phase_two_pi) c.sufficiency.modulus = PhaseModulus::two_pi;
  if (m.skip_rank) c.sufficiency.enforce_rank = false;
  if (m.drop_trace) c.petz.trace_override = TraceMode::none;
  return c;
}

using Predicate = std::function<bool(const Instance&)>;

bool safely(const Predicate& p, const Instance& inst) {
  try {
    return p(inst);
  } catch (const Error&) {
    return false;
  }
}

bool weakly_sufficient(const Instance& inst, const Context& ctx) {
  return check_weak_sufficiency(*inst.statistic, inst.family, ctx.sufficiency).sufficient;
}

bool nontrivial(const StateFamily& f) { return numerical_rank(f.vectors()) >= 2; }

// Each atom loaded by at most one state.
bool disjoint_support(const PetzInstance& pi) {
  for (std::size_t k = 0; k < pi.statistic.size(); ++k) {
    std::size_t loaded = 0;
    for (const auto& row : pi.weights)
      if (row[k] > 1e-7) ++loaded;
    if (loaded > 1) return false;
  }
  return true;
}

bool coarse_disagreement(const Instance& inst, const Context& ctx) {
  const auto& t = *inst.statistic;
  if (t.size() > 7 || !weakly_sufficient(inst, ctx)) return false;
  CoarseGrainingEnumerator e(t, 7);
  while (auto phi = e.next()) {
    const bool direct =
        check_weak_sufficiency(apply_coarse(t, *phi).statistic, inst.family, ctx.sufficiency)
            .sufficient;
    if (check_coarse_sufficient(t, inst.family, *phi, ctx.sufficiency) != direct) return true;
  }
  return false;
}

bool minimality_fails(const Instance& inst, const Context& ctx) {
  const auto& t = *inst.statistic;
  if (t.size() > 7 || !nontrivial(inst.family) || !weakly_sufficient(inst, ctx)) return false;
  const auto result = minimal_statistic(t, inst.family, ctx.sufficiency);
  if (result.exists()) {
    CoarseGrainingEnumerator e(t, 7);
    while (auto phi = e.next()) {
      const auto u = apply_coarse(t, *phi).statistic;
      if (check_weak_sufficiency(u, inst.family, ctx.sufficiency).sufficient &&
          !is_function_of(*result.statistic, u))
        return true;
    }
    return false;
  }
  for (const auto& tn : dead_atom_merges(t, *result.dead_atom))
    if (!check_weak_sufficiency(tn, inst.family, ctx.sufficiency).sufficient) return true;
  return false;
}

bool existence_fails(const Instance& inst, const Context& ctx) {
  if (inst.family.size() > max_oracle_labels) return false;
  const auto result = exists_weakly_sufficient(inst.family, ctx.sufficiency);
  const bool expected = oracle_feasible(gram_constraints(inst.family, ctx.sufficiency.zero_tol),
                                        inst.family.labels(), 72);
  if (result.exists() != expected) return true;
  return result.exists() &&
         !check_weak_sufficiency(result.constructed->statistic, inst.family, ctx.sufficiency)
              .sufficient;
}

bool petz_structural_fails(const Instance& inst, const Context& ctx) {
  const auto pi = make_petz_instance(*inst.statistic, inst.family);
  PetzCertificate cert;
  try {
    cert = petz_feasibility(pi, ctx.petz);
  } catch (const UndecidedError&) {
    return disjoint_support(pi) && !orthogonality_precheck(inst.family);
  }
  if (const auto* ok = std::get_if<PetzFeasible>(&cert))
    return !structural_check(pi, *ok).pass || !petz_implies_weak_check(pi, *ok);
  return disjoint_support(pi) && !orthogonality_precheck(inst.family);
}

bool petz_orthogonality_fails(const Instance& inst, const Context& ctx) {
  const auto pi = make_petz_instance(*inst.statistic, inst.family);
  try {
    return std::holds_alternative<PetzFeasible>(petz_feasibility(pi, ctx.petz)) &&
           orthogonality_precheck(inst.family).has_value();
  } catch (const UndecidedError&) {
    return false;
  }
}

bool roundtrip_fails(const Instance& inst, const Context&) {
  const std::string text = serialize_instance(inst);
  const auto back = parse_instance(text);
  if (serialize_instance(back) != text) return true;
  for (std::size_t i = 0; i < inst.family.size(); ++i)
    if (back.family.label(i) != inst.family.label(i) ||
        max_abs_diff(back.family.vector(i), inst.family.vector(i)) > 1e-15)
      return true;
  const auto& a = *inst.statistic;
  const auto& b = *back.statistic;
  if (a.size() != b.size()) return true;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a.atom(k).eigenvalue != b.atom(k).eigenvalue ||
        max_abs_diff(a.atom(k).projection.matrix(), b.atom(k).projection.matrix()) > 1e-15)
      return true;
  return false;
}

bool recheck_fails(const Instance& inst, const Context& ctx) {
  const auto verdict = check_weak_sufficiency(*inst.statistic, inst.family, ctx.sufficiency);
  const auto cert = weak_certificate(*inst.statistic, verdict, ctx.sufficiency, "from-file");
  const auto reparsed = Json::parse(cert.dump());
  return recheck_certificate(parse_instance(serialize_instance(inst)), reparsed).status !=
         Recheck::verified;
}

struct Property {
  std::string name;
  std::function<GeneratorSpec(Rng&, std::size_t)> spec;
  std::function<bool(const Instance&, const Context&)> fails;
};

std::size_t draw(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::vector<Property> properties() {
  std::vector<Property> ps;
  ps.push_back({"oracle_agreement",
                [](Rng& rng, std::size_t i) {
                  static const Flavor cycle[] = {Flavor::real_vectors, Flavor::complex_vectors,
                                                 Flavor::sufficient_planted,
                                                 Flavor::phase_obstructed};
                  GeneratorSpec s;
                  s.flavor = cycle[i % 4];
                  const bool tri = s.flavor == Flavor::phase_obstructed;
                  s.dim = draw(rng, tri ? 3 : 2, 5);
                  s.family_size = draw(rng, tri ? 3 : 2, max_brute_force_states);
                  s.atoms = draw(rng, s.flavor == Flavor::sufficient_planted ? 2 : 1,
                                 std::min<std::size_t>(s.dim, max_brute_force_atoms));
                  return s;
                },
                [](const Instance& inst, const Context& ctx) {
                  return weakly_sufficient(inst, ctx) !=
                         brute_force_weak_sufficiency(*inst.statistic, inst.family);
                }});
  ps.push_back({"witness_soundness",
                [](Rng& rng, std::size_t i) {
                  GeneratorSpec s;
                  s.flavor = i % 2 ? Flavor::sufficient_planted : Flavor::real_vectors;
                  s.dim = draw(rng, 2, 6);
                  s.family_size = draw(rng, 2, 5);
                  s.atoms = draw(rng, 2, s.dim);
                  return s;
                },
                [](const Instance& inst, const Context& ctx) {
                  const auto v =
                      check_weak_sufficiency(*inst.statistic, inst.family, ctx.sufficiency);
                  return v.sufficient && !verify_witness(*inst.statistic, inst.family, *v.witness).ok;
                }});
  ps.push_back({"existence_roundtrip",
                [](Rng& rng, std::size_t i) {
                  GeneratorSpec s;
                  s.flavor = i % 4 == 3 ? Flavor::phase_obstructed : Flavor::real_vectors;
                  s.dim = draw(rng, 3, 8);
                  s.family_size = draw(rng, 3, 5);
                  return s;
                },
                existence_fails});
  ps.push_back({"coarse_equivalence",
                [](Rng& rng, std::size_t) {
                  GeneratorSpec s;
                  s.flavor = Flavor::sufficient_planted;
                  s.dim = draw(rng, 3, 7);
                  s.atoms = draw(rng, 2, std::min<std::size_t>(s.dim, 6));
                  s.family_size = draw(rng, 2, 4);
                  return s;
                },
                coarse_disagreement});
  ps.push_back({"minimality",
                [](Rng& rng, std::size_t i) {
                  GeneratorSpec s;
                  s.flavor = Flavor::sufficient_planted;
                  s.dead_atom = i % 3 == 2;
                  s.dim = draw(rng, 3, 7);
                  s.atoms = draw(rng, 3, std::min<std::size_t>(s.dim, 6));
                  s.family_size = draw(rng, 2, 4);
                  return s;
                },
                minimality_fails});
  ps.push_back({"petz_structural",
                [](Rng& rng, std::size_t) {
                  GeneratorSpec s;
                  s.flavor = Flavor::atom_planted;
                  s.family_size = draw(rng, 1, 3);
                  s.dim = draw(rng, 2 * s.family_size, 2 * s.family_size + 2);
                  s.atoms = draw(rng, 2 * s.family_size, s.dim);
                  return s;
                },
                petz_structural_fails});
  ps.push_back({"petz_orthogonality",
                [](Rng& rng, std::size_t i) {
                  GeneratorSpec s;
                  s.flavor = i % 2 ? Flavor::complex_vectors : Flavor::orthogonal_planted;
                  s.dim = draw(rng, 2, 5);
                  s.family_size = draw(rng, 2, s.dim);
                  s.atoms = draw(rng, 1, s.dim);
                  return s;
                },
                petz_orthogonality_fails});
  ps.push_back({"serialization_roundtrip",
                [](Rng& rng, std::size_t i) {
                  static const Flavor cycle[] = {Flavor::real_vectors, Flavor::complex_vectors,
                                                 Flavor::atom_planted, Flavor::sufficient_planted};
                  GeneratorSpec s;
                  s.flavor = cycle[i % 4];
                  s.dim = draw(rng, 4, 8);
                  s.family_size = draw(rng, 2, 4);
                  s.atoms = draw(rng, 4, s.dim);
                  return s;
                },
                roundtrip_fails});
  ps.push_back({"certificate_recheck",
                [](Rng& rng, std::size_t i) {
                  static const Flavor cycle[] = {Flavor::real_vectors, Flavor::sufficient_planted,
                                                 Flavor::phase_obstructed};
                  GeneratorSpec s;
                  s.flavor = cycle[i % 3];
                  s.dim = draw(rng, 3, 6);
                  s.family_size = draw(rng, 3, 4);
                  s.atoms = draw(rng, 2, s.dim);
                  return s;
                },
                recheck_fails});
  return ps;
}

}  // namespace

std::string flavor_name(Flavor f) {
  switch (f) {
    case Flavor::real_vectors: return "real_vectors";
    case Flavor::complex_vectors: return "complex_vectors";
    case Flavor::orthogonal_planted: return "orthogonal_planted";
    case Flavor::atom_planted: return "atom_planted";
    case Flavor::phase_obstructed: return "phase_obstructed";
    case Flavor::sufficient_planted: return "sufficient_planted";
  }
  return "unknown";
}

std::optional<Flavor> flavor_from_name(const std::string& name) {
  for (Flavor f : {Flavor::real_vectors, Flavor::complex_vectors, Flavor::orthogonal_planted,
                   Flavor::atom_planted, Flavor::phase_obstructed, Flavor::sufficient_planted})
    if (flavor_name(f) == name) return f;
  return std::nullopt;
}

Instance generate(const GeneratorSpec& spec) {
  require(spec.dim >= 1 && spec.dim <= max_generator_dim, "dimension out of range");
  require(spec.family_size >= 1 && spec.family_size <= max_generator_family,
          "family size out of range");
  require(spec.atoms <= spec.dim, "more atoms than dimensions");
  Rng rng(spec.seed);
  const std::size_t m = spec.atoms ? spec.atoms : draw(rng, 1, spec.dim);
  const std::size_t n = spec.family_size;

  switch (spec.flavor) {
    case Flavor::real_vectors:
    case Flavor::complex_vectors: {
      const auto t = random_statistic(spec.dim, m, rng);
      std::vector<CVector> states;
      for (std::size_t i = 0; i < n; ++i)
        states.push_back(random_unit_vector(spec.dim, rng, spec.flavor == Flavor::real_vectors));
      return {t.statistic, StateFamily(make_labels(n), states)};
    }
    case Flavor::orthogonal_planted: {
      require(n <= spec.dim, "orthogonal_planted needs family size <= dimension");
      const auto t = random_statistic(spec.dim, m, rng);
      auto basis = random_basis(spec.dim, rng);
      basis.resize(n);
      return {t.statistic, StateFamily(make_labels(n), basis)};
    }
    case Flavor::atom_planted: return generate_atom_planted(spec, m, rng);
    case Flavor::phase_obstructed: return generate_phase_obstructed(spec, m, rng);
    case Flavor::sufficient_planted: return generate_sufficient(spec, m, rng);
  }
  throw PreconditionError("generate: unknown flavor");
}

bool brute_force_weak_sufficiency(const DiscreteStatistic& t, const StateFamily& f,
                                  int phase_steps) {
  if (f.size() > max_brute_force_states || t.size() > max_brute_force_atoms) {
    std::ostringstream os;
    os << "brute_force_weak_sufficiency: size guard (" << f.size() << " states, " << t.size()
       << " atoms)";
    throw PreconditionError(os.str());
  }
  if (t.dim() != f.dim()) throw DimensionError("brute_force_weak_sufficiency: dimension mismatch");
  for (const auto& atom : t.atoms()) {
    std::vector<CVector> comps;
    for (const auto& v : f.vectors())
      comps.push_back(atom.projection.matrix() * std::span<const Complex>(v));
    if (numerical_rank(comps) > 1) return false;
  }
  return oracle_feasible(direct_atom_constraints(t, f, 1e-10), f.labels(), phase_steps);
}

Instance shrink_instance(Instance inst, const std::function<bool(const Instance&)>& fails) {
  const Predicate p = fails;
  bool progress = true;
  while (progress && inst.family.size() > 1) {
    progress = false;
    for (std::size_t drop = 0; drop < inst.family.size(); ++drop) {
      std::vector<std::string> labels;
      std::vector<CVector> vecs;
      for (std::size_t i = 0; i < inst.family.size(); ++i)
        if (i != drop) {
          labels.push_back(inst.family.label(i));
          vecs.push_back(inst.family.vector(i));
        }
      Instance candidate{inst.statistic, StateFamily(labels, vecs)};
      if (safely(p, candidate)) {
        inst = std::move(candidate);
        progress = true;
        break;
      }
    }
  }
  progress = true;
  while (progress && inst.statistic && inst.statistic->size() > 1) {
    progress = false;
    const auto& t = *inst.statistic;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
      CoarseMap phi{t.eigenvalues()};
      phi.values[k + 1] = phi.values[k];
      Instance candidate{apply_coarse(t, phi).statistic, inst.family};
      if (safely(p, candidate)) {
        inst = std::move(candidate);
        progress = true;
        break;
      }
    }
  }
  std::vector<CVector> rounded;
  for (const auto& v : inst.family.vectors()) {
    CVector r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      r[i] = {std::round(v[i].real() * 1000.0) / 1000.0, std::round(v[i].imag() * 1000.0) / 1000.0};
    const double len = norm(r);
    if (len == 0.0) return inst;
    rounded.push_back(scaled(r, 1.0 / len));
  }
  Instance candidate{inst.statistic, StateFamily(inst.family.labels(), rounded)};
  if (safely(p, candidate)) inst = std::move(candidate);
  return inst;
}

bool PropertyReport::passed() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

nlohmann::json PropertyReport::to_json() const {
  Json props = Json::array();
  for (const auto& r : results) {
    Json j = {{"name", r.name},
              {"passed", r.passed},
              {"cases", r.cases},
              {"failures", r.failures},
              {"message", r.message},
              {"seconds", r.seconds}};
    if (r.counterexample) j["counterexample"] = *r.counterexample;
    props.push_back(std::move(j));
  }
  return {{"seed", seed},
          {"count", count},
          {"rng", "mt19937_64"},
          {"passed", passed()},
          {"properties", props}};
}

PropertyReport run_property_suite(std::uint64_t seed, std::size_t count,
                                  const Mutations& mutations) {
  PropertyReport report;
  report.seed = seed;
  report.count = count;
  if (count == 0) return report;
  const Context ctx = make_context(mutations);
  Rng master(seed);

  for (const auto& prop : properties()) {
    const auto start = std::chrono::steady_clock::now();
    PropertyResult result;
    result.name = prop.name;
    for (std::size_t i = 0; i < count; ++i) {
      GeneratorSpec spec = prop.spec(master, i);
      spec.seed = master();
      ++result.cases;
      bool failed = false;
      std::string why;
      Instance inst;
      try {
        inst = generate(spec);
        if (prop.name == "serialization_roundtrip" &&
            serialize_instance(generate(spec)) != serialize_instance(inst)) {
          failed = true;
          why = "generator is not deterministic";
        }
        if (!failed) failed = prop.fails(inst, ctx);
      } catch (const Error& e) {
        failed = true;
        why = e.what();
      }
      if (!failed) continue;
      ++result.failures;
      if (result.passed) {
        result.passed = false;
        const auto predicate = [&](const Instance& x) { return prop.fails(x, ctx); };
        const bool shrinkable = why.empty();
        Instance shrunk = shrinkable ? shrink_instance(inst, predicate) : inst;
        Json ce = {{"instance_seed", spec.seed},
                   {"flavor", flavor_name(spec.flavor)},
                   {"shrunk", shrinkable}};
        if (inst.statistic) ce["instance"] = instance_to_json(shrunk);
        result.counterexample = std::move(ce);
        result.message = why.empty() ? "property violated" : why;
      }
    }
    if (result.passed) result.message = "ok";
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.results.push_back(std::move(result));
  }
  return report;
}

}  // namespace wsq
