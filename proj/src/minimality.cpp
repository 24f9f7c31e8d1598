#include "wsq/minimality.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wsq/errors.hpp"

namespace wsq {

namespace {

double row_norm(const std::vector<Complex>& row) { return norm(row); }

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

double proportionality_defect(const GammaTable& g, std::size_t j, std::size_t m) {
  const auto& a = g.gamma.at(j);
  const auto& b = g.gamma.at(m);
  const double na = row_norm(a), nb = row_norm(b);
  if (na == 0.0 || nb == 0.0) return 1.0;
  const auto& big = na >= nb ? a : b;
  const auto& small = na >= nb ? b : a;
  const double nbig = std::max(na, nb);
  const Complex ratio = inner(small, big) / (nbig * nbig);
  double r2 = 0.0;
  for (std::size_t i = 0; i < big.size(); ++i) r2 += std::norm(small[i] - ratio * big[i]);
  // Gram determinant |a|²|b|² − |<a,b>|² = |big|² r², free of cancellation.
  const double det = nbig * nbig * r2;
  const double tr = na * na + nb * nb;
  const double lmax = 0.5 * (tr + std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
  return std::sqrt(det) / lmax;
}

bool atoms_equivalent(const GammaTable& g, std::size_t j, std::size_t m,
                      const EquivalenceOptions& options, Complex* beta) {
  if (!g.active.at(j) || !g.active.at(m)) return false;
  const auto& a = g.gamma[j];
  const auto& b = g.gamma[m];
  const double nb = row_norm(b);
  if (row_norm(a) == 0.0 || nb == 0.0) return false;
  if (proportionality_defect(g, j, m) > options.rel_tol) return false;
  const Complex ratio = inner(a, b) / (nb * nb);
  if (options.strict_real && std::abs(ratio.imag()) > options.rel_tol * std::abs(ratio))
    return false;
  if (beta) *beta = ratio;
  return true;
}

AtomClass equivalence_classes(const GammaTable& g, const EquivalenceOptions& options) {
  const std::size_t n = g.active.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t m = j + 1; m < n; ++m) {
      if (!atoms_equivalent(g, j, m, options)) continue;
      const std::size_t rj = find_root(parent, j), rm = find_root(parent, m);
      if (rj != rm) parent[std::max(rj, rm)] = std::min(rj, rm);
    }

  AtomClass out;
  std::map<std::size_t, std::vector<std::size_t>> by_root;
  for (std::size_t k = 0; k < n; ++k)
    if (g.active[k]) by_root[find_root(parent, k)].push_back(k);
  for (auto& [root, members] : by_root) {
    const std::size_t rep = members.front();
    const double nrep = row_norm(g.gamma[rep]);
    for (std::size_t k : members) {
      out.witnesses[{k, rep}] = inner(g.gamma[k], g.gamma[rep]) / (nrep * nrep);
      for (std::size_t other : members)
        if (other > k)
          out.transitivity_residual =
              std::max(out.transitivity_residual, proportionality_defect(g, k, other));
    }
    out.classes.push_back(members);
  }
  std::sort(out.classes.begin(), out.classes.end());
  return out;
}

bool check_coarse_sufficient(const DiscreteStatistic& t, const StateFamily& f,
                             const CoarseMap& phi, const SufficiencyOptions& options,
                             const EquivalenceOptions& equivalence) {
  const auto verdict = check_weak_sufficiency(t, f, options);
  if (!verdict.sufficient)
    throw PreconditionError("check_coarse_sufficient: the statistic is not weakly sufficient");
  const GammaTable& g = *verdict.gamma;
  const auto coarse = apply_coarse(t, phi);
  for (const auto& block : coarse.partition) {
    std::vector<std::size_t> active;
    for (std::size_t k : block)
      if (g.active[k]) active.push_back(k);
    for (std::size_t a = 0; a < active.size(); ++a)
      for (std::size_t b = a + 1; b < active.size(); ++b)
        if (!atoms_equivalent(g, active[a], active[b], equivalence)) return false;
  }
  return true;
}

MinimalResult minimal_statistic(const DiscreteStatistic& t, const StateFamily& f,
                                const SufficiencyOptions& options,
                                const EquivalenceOptions& equivalence) {
  if (numerical_rank(f.vectors(), options.rank_tol) < 2)
    throw PreconditionError("minimal_statistic: the family is trivial (span of dimension < 2)");
  const auto verdict = check_weak_sufficiency(t, f, options);
  if (!verdict.sufficient)
    throw PreconditionError("minimal_statistic: the statistic is not weakly sufficient");
  const GammaTable& g = *verdict.gamma;

  MinimalResult out;
  out.atom_classes = equivalence_classes(g, equivalence);
  for (std::size_t k = 0; k < t.size(); ++k)
    if (!g.active[k]) {
      out.dead_atom = k;
      return out;
    }

  std::vector<Atom> atoms;
  const std::size_t d = t.dim();
  for (std::size_t m = 0; m < out.atom_classes.classes.size(); ++m) {
    CMatrix q(d, d);
    for (std::size_t j : out.atom_classes.classes[m]) q += t.atom(j).projection.matrix();
    atoms.push_back({static_cast<double>(m + 1), HermitianMatrix(q, 1e-8)});
  }
  out.statistic = DiscreteStatistic(std::move(atoms));
  return out;
}

std::optional<SpectralFunction> is_function_of(const DiscreteStatistic& s,
                                               const DiscreteStatistic& u, double tol) {
  if (s.dim() != u.dim()) throw DimensionError("is_function_of: dimension mismatch");
  SpectralFunction psi(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const CMatrix& f = u.atom(i).projection.matrix();
    std::size_t hits = 0;
    for (const auto& q : s.atoms()) {
      if (max_abs_diff(q.projection.matrix() * f, f) <= tol) {
        ++hits;
        psi[i] = q.eigenvalue;
      }
    }
    if (hits != 1) return std::nullopt;
  }
  return psi;
}

SetPartitionEnumerator::SetPartitionEnumerator(std::size_t n)
    : n_(n), rgs_(n, 0), prefix_max_(n, 0) {}

std::optional<std::vector<std::size_t>> SetPartitionEnumerator::next() {
  if (done_) return std::nullopt;
  if (!started_) {
    started_ = true;
    if (n_ == 0) done_ = true;
    return rgs_;
  }
  // Rightmost position that may grow without skipping a block number.
  std::size_t i = n_;
  while (i-- > 1) {
    if (rgs_[i] <= prefix_max_[i - 1]) break;
  }
  if (i == 0 || i >= n_) {
    done_ = true;
    return std::nullopt;
  }
  ++rgs_[i];
  for (std::size_t k = i + 1; k < n_; ++k) rgs_[k] = 0;
  for (std::size_t k = i; k < n_; ++k) prefix_max_[k] = std::max(prefix_max_[k - 1], rgs_[k]);
  return rgs_;
}

CoarseGrainingEnumerator::CoarseGrainingEnumerator(const DiscreteStatistic& t,
                                                   std::size_t max_atoms)
    : partitions_(t.size()) {
  const std::size_t limit = std::min(max_atoms, max_enumerable_atoms);
  if (t.size() > limit) {
    std::ostringstream os;
    os << "enumerate_coarse_grainings: " << t.size() << " atoms exceed the limit of " << limit;
    throw PreconditionError(os.str());
  }
}

std::optional<CoarseMap> CoarseGrainingEnumerator::next() {
  auto blocks = partitions_.next();
  if (!blocks) return std::nullopt;
  CoarseMap phi;
  for (std::size_t b : *blocks) phi.values.push_back(static_cast<double>(b + 1));
  return phi;
}

std::uint64_t bell_number(std::size_t n) {
  // Bell triangle.
  std::vector<std::uint64_t> row{1};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (std::uint64_t x : row) next.push_back(next.back() + x);
    row = std::move(next);
  }
  return row.front();
}

std::vector<DiscreteStatistic> dead_atom_merges(const DiscreteStatistic& t, std::size_t dead) {
  if (dead >= t.size()) throw PreconditionError("dead_atom_merges: atom index out of range");
  std::vector<DiscreteStatistic> out;
  for (std::size_t n = 0; n < t.size(); ++n) {
    if (n == dead) continue;
    CoarseMap phi{t.eigenvalues()};
    phi.values[dead] = t.atom(n).eigenvalue;
    out.push_back(apply_coarse(t, phi).statistic);
  }
  return out;
}

}  // namespace wsq
