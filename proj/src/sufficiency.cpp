#include "wsq/sufficiency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wsq/errors.hpp"

namespace wsq {

namespace {

// Unit vector along v, rotated so its largest-magnitude entry is positive real.
CVector canonical_direction(const CVector& v) {
  const double len = norm(v);
  std::size_t lead = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[lead]) + 1e-14 * len) lead = i;
  const Complex rot = std::conj(v[lead]) / std::abs(v[lead]);
  return scaled(v, rot / len);
}

}  // namespace

std::vector<PhaseConstraint> gram_constraints(const StateFamily& f, double zero_tol) {
  std::vector<PhaseConstraint> out;
  for (std::size_t a = 0; a < f.size(); ++a)
    for (std::size_t b = a + 1; b < f.size(); ++b) {
      const Complex g = inner(f.vector(a), f.vector(b));
      if (std::abs(g) > zero_tol) out.push_back({f.label(a), f.label(b), g});
    }
  return out;
}

std::vector<PhaseConstraint> atom_constraints(const DiscreteStatistic& t, const StateFamily& f,
                                              double zero_tol) {
  const auto table = project_states(t, f);
  std::vector<PhaseConstraint> out;
  for (std::size_t k = 0; k < t.size(); ++k)
    for (std::size_t a = 0; a < f.size(); ++a)
      for (std::size_t b = a + 1; b < f.size(); ++b) {
        // <e_k φ', φ''> = <e_k φ', e_k φ''>
        const Complex v = inner(table.components[k][a], table.components[k][b]);
        if (std::abs(v) > zero_tol) out.push_back({f.label(a), f.label(b), v});
      }
  return out;
}

GammaExtraction extract_gamma(const DiscreteStatistic& t, const StateFamily& f,
                              const SufficiencyOptions& options) {
  if (t.dim() != f.dim()) throw DimensionError("weak sufficiency: dimension mismatch");
  const auto table = project_states(t, f);
  GammaExtraction out;
  GammaTable g;
  g.active.assign(t.size(), false);
  g.xi.assign(t.size(), CVector{});
  g.gamma.assign(t.size(), std::vector<Complex>(f.size()));

  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto& comps = table.components[k];
    const std::size_t rank = numerical_rank(comps, options.rank_tol);
    if (rank == 0) continue;
    if (rank > 1 && options.enforce_rank) {
      out.violations.push_back({k, t.atom(k).eigenvalue, rank});
      continue;
    }
    std::size_t best = 0;
    for (std::size_t th = 1; th < comps.size(); ++th)
      if (norm(comps[th]) > norm(comps[best])) best = th;
    g.active[k] = true;
    g.xi[k] = canonical_direction(comps[best]);
    for (std::size_t th = 0; th < comps.size(); ++th) g.gamma[k][th] = inner(comps[th], g.xi[k]);
  }
  if (out.violations.empty()) out.table = std::move(g);
  return out;
}

SufficiencyVerdict check_weak_sufficiency(const DiscreteStatistic& t, const StateFamily& f,
                                          const SufficiencyOptions& options) {
  SufficiencyVerdict verdict;
  auto extraction = extract_gamma(t, f, options);
  if (!extraction.table) {
    for (const auto& v : extraction.violations) verdict.violations.emplace_back(v);
    return verdict;
  }
  const GammaTable& g = *extraction.table;

  const auto constraints = atom_constraints(t, f, options.zero_tol);
  const auto aligned =
      align_phases(constraints, f.labels(), {options.angle_tol, options.modulus});
  verdict.gamma = g;
  if (!aligned.feasible()) {
    verdict.violations.emplace_back(PhaseViolation{*aligned.obstruction});
    return verdict;
  }
  const VersionAssignment& versions = *aligned.versions;

  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (g.active[k]) active.push_back(k);
  const double weight = 1.0 / std::sqrt(static_cast<double>(active.size()));

  WitnessFactorization w;
  w.versions = versions;
  w.chi.assign(t.dim(), 0.0);
  for (const auto& label : f.labels()) w.functions[label].assign(t.size(), 0.0);

  for (std::size_t k : active) {
    // c_θ γ_k(θ) share one phase δ_k (mod π) across θ; rotate ξ_k by it.
    std::size_t lead = 0;
    for (std::size_t th = 1; th < f.size(); ++th)
      if (std::abs(g.gamma[k][th]) > std::abs(g.gamma[k][lead])) lead = th;
    const Complex lead_val = versions.phase(f.label(lead)) * g.gamma[k][lead];
    const Complex rot = lead_val / std::abs(lead_val);
    for (std::size_t i = 0; i < t.dim(); ++i) w.chi[i] += weight * rot * g.xi[k][i];
    for (std::size_t th = 0; th < f.size(); ++th) {
      const Complex aligned_gamma = versions.phase(f.label(th)) * g.gamma[k][th] * std::conj(rot);
      w.functions[f.label(th)][k] = aligned_gamma.real() / weight;
    }
  }
  verdict.sufficient = true;
  verdict.witness = std::move(w);
  return verdict;
}

WitnessCheck verify_witness(const DiscreteStatistic& t, const StateFamily& f,
                            const WitnessFactorization& w, double tol) {
  WitnessCheck out;
  out.residuals.assign(f.size(), std::numeric_limits<double>::infinity());
  if (w.chi.size() != t.dim() || t.dim() != f.dim()) {
    out.max_residual = std::numeric_limits<double>::infinity();
    return out;
  }
  bool well_formed = true;
  for (std::size_t th = 0; th < f.size(); ++th) {
    const auto& label = f.label(th);
    auto fn = w.functions.find(label);
    auto ph = w.versions.phases.find(label);
    if (fn == w.functions.end() || ph == w.versions.phases.end() ||
        fn->second.size() != t.size()) {
      well_formed = false;
      continue;
    }
    const CVector lhs = evaluate_function_on_statistic(t, fn->second, w.chi);
    const CVector rhs = scaled(f.vector(th), ph->second);
    out.residuals[th] = norm(subtract(lhs, rhs));
  }
  out.max_residual = 0.0;
  for (double r : out.residuals) out.max_residual = std::max(out.max_residual, r);
  const bool chi_nonzero = norm(w.chi) > 0.0;
  out.ok = well_formed && chi_nonzero && out.max_residual <= tol;
  return out;
}

ExistenceResult exists_weakly_sufficient(const StateFamily& f, const SufficiencyOptions& options) {
  if (f.size() == 0) throw PreconditionError("exists_weakly_sufficient: empty family");
  ExistenceResult result;
  const auto aligned =
      align_phases(gram_constraints(f, options.zero_tol), f.labels(), {options.angle_tol, options.modulus});
  if (!aligned.feasible()) {
    result.obstruction = aligned.obstruction;
    return result;
  }
  const VersionAssignment& versions = *aligned.versions;

  std::vector<std::size_t> order(f.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return f.label(a) < f.label(b); });

  std::vector<CVector> basis;
  std::vector<std::string> basis_labels;
  for (std::size_t idx : order) {
    basis.push_back(scaled(f.vector(idx), versions.phase(f.label(idx))));
    if (numerical_rank(basis, options.rank_tol) < basis.size()) {
      basis.pop_back();
    } else {
      basis_labels.push_back(f.label(idx));
    }
  }
  const auto gs = gram_schmidt(basis, options.rank_tol);

  const std::size_t d = f.dim();
  std::vector<Atom> atoms;
  CMatrix covered(d, d);
  for (std::size_t n = 0; n < gs.ortho.size(); ++n) {
    const CMatrix p = CMatrix::outer(gs.ortho[n]);
    covered += p;
    atoms.push_back({static_cast<double>(n + 1), HermitianMatrix(p, 1e-8)});
  }
  if (gs.ortho.size() < d)
    atoms.push_back({0.0, HermitianMatrix(CMatrix::identity(d) - covered, 1e-8)});
  DiscreteStatistic t(std::move(atoms));

  auto verdict = check_weak_sufficiency(t, f, options);
  if (!verdict.sufficient)
    throw Error("exists_weakly_sufficient: constructed statistic failed the weak-sufficiency check");
  result.constructed = ConstructedStatistic{std::move(t), std::move(*verdict.witness), versions,
                                            std::move(basis_labels)};
  return result;
}

}  // namespace wsq
