#include "wsq/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "wsq/errors.hpp"

namespace wsq {

DiscreteStatistic::DiscreteStatistic(std::vector<Atom> atoms, double tol)
    : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw InvariantError("statistic: no atoms");
  std::stable_sort(atoms_.begin(), atoms_.end(),
                   [](const Atom& a, const Atom& b) { return a.eigenvalue < b.eigenvalue; });
  const std::size_t d = atoms_.front().projection.dim();
  CMatrix total(d, d);
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    const auto& e = atoms_[k].projection;
    if (e.dim() != d) throw InvariantError("statistic: projections of different dimension");
    if (!std::isfinite(atoms_[k].eigenvalue))
      throw InvariantError("statistic: non-finite eigenvalue");
    const double idem = max_abs_diff(e.matrix() * e.matrix(), e.matrix());
    if (idem > tol) {
      std::ostringstream os;
      os << "statistic: projection " << k << " (eigenvalue " << atoms_[k].eigenvalue
         << ") is not idempotent (defect " << idem << ")";
      throw InvariantError(os.str());
    }
    if (k > 0) {
      const double a = atoms_[k - 1].eigenvalue, b = atoms_[k].eigenvalue;
      if (!(b - a > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}))) {
        std::ostringstream os;
        os << "statistic: eigenvalues are not distinct (" << a << ", " << b << ")";
        throw InvariantError(os.str());
      }
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double cross = (atoms_[j].projection.matrix() * e.matrix()).max_abs();
      if (cross > tol) {
        std::ostringstream os;
        os << "statistic: projections " << j << " and " << k << " are not orthogonal (defect "
           << cross << ")";
        throw InvariantError(os.str());
      }
    }
    total += e.matrix();
  }
  const double completeness = max_abs_diff(total, CMatrix::identity(d));
  if (completeness > tol) {
    std::ostringstream os;
    os << "statistic: projections do not sum to the identity (defect " << completeness << ")";
    throw InvariantError(os.str());
  }
}

std::vector<double> DiscreteStatistic::eigenvalues() const {
  std::vector<double> out;
  out.reserve(atoms_.size());
  for (const auto& a : atoms_) out.push_back(a.eigenvalue);
  return out;
}

std::size_t DiscreteStatistic::find(double lambda, double tol) const {
  for (std::size_t k = 0; k < atoms_.size(); ++k)
    if (std::abs(atoms_[k].eigenvalue - lambda) <= tol) return k;
  return npos;
}

CMatrix DiscreteStatistic::matrix() const {
  CMatrix out(dim(), dim());
  for (const auto& a : atoms_) out += a.projection.matrix() * Complex(a.eigenvalue);
  return out;
}

StateFamily::StateFamily(std::vector<std::string> labels, std::vector<CVector> vectors,
                         double tol)
    : labels_(std::move(labels)), vectors_(std::move(vectors)) {
  if (labels_.size() != vectors_.size())
    throw InvariantError("state family: label count differs from vector count");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    if (!seen.insert(labels_[i]).second)
      throw InvariantError("state family: duplicate label '" + labels_[i] + "'");
    const auto& v = vectors_[i];
    if (v.empty() || v.size() != vectors_.front().size())
      throw InvariantError("state '" + labels_[i] + "' has the wrong dimension");
    for (const auto& z : v)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw InvariantError("state '" + labels_[i] + "' has a non-finite entry");
    if (std::abs(norm(v) - 1.0) > tol)
      throw InvariantError("state '" + labels_[i] + "' not unit norm");
  }
}

std::size_t StateFamily::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw InvariantError("unknown state label '" + label + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

DiscreteStatistic statistic_from_matrix(const HermitianMatrix& m, double group_tol) {
  const auto eig = hermitian_eig(m);
  const double radius = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  if (group_tol < 0.0) group_tol = 1e-9 * radius;
  const std::size_t d = m.dim();

  std::vector<Atom> atoms;
  std::size_t start = 0;
  while (start < eig.values.size()) {
    std::size_t end = start + 1;
    while (end < eig.values.size() && eig.values[end] - eig.values[end - 1] <= group_tol) ++end;
    CMatrix proj(d, d);
    double sum = 0.0;
    for (std::size_t i = start; i < end; ++i) {
      proj += CMatrix::outer(eig.vectors[i]);
      sum += eig.values[i];
    }
    atoms.push_back({sum / static_cast<double>(end - start), HermitianMatrix(proj, 1e-8)});
    start = end;
  }
  return DiscreteStatistic(std::move(atoms));
}

DiscreteStatistic statistic_from_eigen(std::vector<double> eigenvalues,
                                       std::vector<HermitianMatrix> projections, double tol) {
  if (eigenvalues.size() != projections.size())
    throw InvariantError("statistic: eigenvalue count differs from projection count");
  std::vector<Atom> atoms;
  for (std::size_t k = 0; k < eigenvalues.size(); ++k)
    atoms.push_back({eigenvalues[k], std::move(projections[k])});
  return DiscreteStatistic(std::move(atoms), tol);
}

CoarseResult apply_coarse(const DiscreteStatistic& t, const CoarseMap& phi) {
  if (phi.values.size() != t.size())
    throw InvariantError("coarse map is not total on the statistic's eigenvalues");
  std::map<double, std::vector<std::size_t>> blocks;
  for (std::size_t k = 0; k < t.size(); ++k) blocks[phi.values[k]].push_back(k);

  const std::size_t d = t.dim();
  CoarseResult out;
  std::vector<Atom> atoms;
  for (auto& [value, members] : blocks) {
    CMatrix f(d, d);
    for (std::size_t k : members) f += t.atom(k).projection.matrix();
    atoms.push_back({value, HermitianMatrix(f, 1e-8)});
    out.partition.push_back(members);
  }
  out.statistic = DiscreteStatistic(std::move(atoms));
  return out;
}

AtomProjectionTable project_states(const DiscreteStatistic& t, const StateFamily& f) {
  if (t.dim() != f.dim()) throw DimensionError("project_states: dimension mismatch");
  AtomProjectionTable out;
  out.components.resize(t.size());
  out.weights.assign(f.size(), std::vector<double>(t.size()));
  for (std::size_t k = 0; k < t.size(); ++k) {
    for (std::size_t th = 0; th < f.size(); ++th) {
      CVector c = t.atom(k).projection.matrix() * std::span<const Complex>(f.vector(th));
      out.weights[th][k] = std::norm(norm(c));
      out.components[k].push_back(std::move(c));
    }
  }
  return out;
}

CVector evaluate_function_on_statistic(const DiscreteStatistic& t, const SpectralFunction& f,
                                       std::span<const Complex> v) {
  if (f.size() != t.size())
    throw InvariantError("spectral function is not total on the statistic's eigenvalues");
  if (v.size() != t.dim()) throw DimensionError("evaluate_function: dimension mismatch");
  CVector out(v.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (f[k] == 0.0) continue;
    const CVector ev = t.atom(k).projection.matrix() * v;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += f[k] * ev[i];
  }
  return out;
}

}  // namespace wsq
