#include "wsq/petz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wsq/errors.hpp"
#include "wsq/sufficiency.hpp"

namespace wsq {

namespace {

TraceMode trace_mode(const PetzInstance& inst, const PetzOptions& options) {
  if (options.trace_override) return *options.trace_override;
  return inst.unital ? TraceMode::equal_one : TraceMode::at_most_one;
}

// Euclidean projection onto {sum_k w_θk ρ_k = P_θ} (and tr ρ_k = 1 in unital
// mode). The constraints decouple by matrix entry: every off-diagonal entry is
// an independent system W r = p, and the diagonal entries form one system that
// also carries the trace rows.
class AffineProjector {
 public:
  AffineProjector(const PetzInstance& inst, bool with_trace)
      : d_(inst.statistic.dim()), atoms_(inst.statistic.size()), states_(inst.family.size()) {
    CMatrix w(states_, atoms_);
    for (std::size_t th = 0; th < states_; ++th)
      for (std::size_t k = 0; k < atoms_; ++k) w(th, k) = inst.weights[th][k];
    w_ = w;
    w_pinv_ = pseudo_inverse(w, 1e-12);

    for (std::size_t th = 0; th < states_; ++th)
      targets_.push_back(CMatrix::outer(inst.family.vector(th)));

    const std::size_t rows = states_ * d_ + (with_trace ? atoms_ : 0);
    diag_a_ = CMatrix(rows, d_ * atoms_);
    diag_b_.assign(rows, 0.0);
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t th = 0; th < states_; ++th) {
        const std::size_t row = i * states_ + th;
        for (std::size_t k = 0; k < atoms_; ++k) diag_a_(row, i * atoms_ + k) = inst.weights[th][k];
        diag_b_[row] = targets_[th](i, i);
      }
    if (with_trace) {
      for (std::size_t k = 0; k < atoms_; ++k) {
        const std::size_t row = states_ * d_ + k;
        for (std::size_t i = 0; i < d_; ++i) diag_a_(row, i * atoms_ + k) = 1.0;
        diag_b_[row] = 1.0;
      }
    }
    diag_pinv_ = pseudo_inverse(diag_a_, 1e-12);
  }

  void project(std::vector<CMatrix>& rhos) const {
    CVector r(atoms_), p(states_);
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t j = i + 1; j < d_; ++j) {
        for (std::size_t k = 0; k < atoms_; ++k) r[k] = rhos[k](i, j);
        for (std::size_t th = 0; th < states_; ++th) p[th] = targets_[th](i, j);
        const CVector res = subtract(w_ * std::span<const Complex>(r), p);
        const CVector corr = w_pinv_ * std::span<const Complex>(res);
        for (std::size_t k = 0; k < atoms_; ++k) {
          rhos[k](i, j) = r[k] - corr[k];
          rhos[k](j, i) = std::conj(rhos[k](i, j));
        }
      }
    CVector x(d_ * atoms_);
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t k = 0; k < atoms_; ++k) x[i * atoms_ + k] = rhos[k](i, i).real();
    const CVector res = subtract(diag_a_ * std::span<const Complex>(x), diag_b_);
    const CVector corr = diag_pinv_ * std::span<const Complex>(res);
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t k = 0; k < atoms_; ++k)
        rhos[k](i, i) = (x[i * atoms_ + k] - corr[i * atoms_ + k]).real();
  }

 private:
  std::size_t d_, atoms_, states_;
  CMatrix w_, w_pinv_;
  std::vector<CMatrix> targets_;
  CMatrix diag_a_, diag_pinv_;
  CVector diag_b_;
};

CMatrix psd_part(const CMatrix& m) { return psd_project(HermitianMatrix(m, 1e-6)).matrix(); }

// Projection onto {tr ρ ≤ 1}.
CMatrix trace_cap(const CMatrix& m) {
  const double tr = m.trace().real();
  if (tr <= 1.0) return m;
  const std::size_t d = m.rows();
  return m - CMatrix::identity(d) * Complex((tr - 1.0) / static_cast<double>(d));
}

double raw_residual(const PetzInstance& inst, const std::vector<CMatrix>& rhos, TraceMode mode) {
  const std::size_t d = inst.statistic.dim();
  double worst = 0.0;
  for (std::size_t th = 0; th < inst.family.size(); ++th) {
    CMatrix sum(d, d);
    for (std::size_t k = 0; k < rhos.size(); ++k) sum += rhos[k] * Complex(inst.weights[th][k]);
    worst = std::max(worst, max_abs_diff(sum, CMatrix::outer(inst.family.vector(th))));
  }
  for (const auto& rho : rhos) {
    const double tr = rho.trace().real();
    if (mode == TraceMode::equal_one) worst = std::max(worst, std::abs(tr - 1.0));
    if (mode == TraceMode::at_most_one) worst = std::max(worst, tr - 1.0);
  }
  return worst;
}

}  // namespace

PetzInstance make_petz_instance(DiscreteStatistic t, StateFamily f, bool unital) {
  auto table = project_states(t, f);
  return PetzInstance{std::move(t), std::move(f), std::move(table.weights), unital};
}

std::optional<OrthogonalityViolation> orthogonality_precheck(const StateFamily& f, double tol) {
  for (std::size_t a = 0; a < f.size(); ++a)
    for (std::size_t b = a + 1; b < f.size(); ++b) {
      const Complex overlap = inner(f.vector(a), f.vector(b));
      if (std::abs(overlap) > tol) return OrthogonalityViolation{a, b, overlap};
    }
  return std::nullopt;
}

double petz_constraint_residual(const PetzInstance& inst, const std::vector<HermitianMatrix>& rhos,
                                TraceMode mode) {
  std::vector<CMatrix> raw;
  for (const auto& rho : rhos) raw.push_back(rho.matrix());
  return raw_residual(inst, raw, mode);
}

PetzCertificate petz_feasibility(const PetzInstance& inst, const PetzOptions& options) {
  if (inst.statistic.dim() != inst.family.dim())
    throw DimensionError("petz_feasibility: dimension mismatch");
  if (inst.weights.size() != inst.family.size())
    throw DimensionError("petz_feasibility: weight table does not match the family");
  if (auto bad = orthogonality_precheck(inst.family, options.orthogonality_tol)) {
    return PetzInfeasibleOrthogonality{inst.family.label(bad->left), inst.family.label(bad->right),
                                       bad->overlap};
  }

  const TraceMode mode = trace_mode(inst, options);
  const std::size_t d = inst.statistic.dim();
  const std::size_t atoms = inst.statistic.size();
  const AffineProjector affine(inst, mode == TraceMode::equal_one);

  std::vector<CMatrix> x(atoms, CMatrix::identity(d) * Complex(1.0 / static_cast<double>(d)));
  std::vector<CMatrix> psd_increment(atoms, CMatrix(d, d));
  std::vector<CMatrix> cap_increment(atoms, CMatrix(d, d));
  std::vector<double> history;

  for (int it = 1; it <= options.max_iters; ++it) {
    affine.project(x);
    if (mode == TraceMode::at_most_one) {
      for (std::size_t k = 0; k < atoms; ++k) {
        const CMatrix y = x[k] + cap_increment[k];
        x[k] = trace_cap(y);
        cap_increment[k] = y - x[k];
      }
    }
    for (std::size_t k = 0; k < atoms; ++k) {
      const CMatrix y = x[k] + psd_increment[k];
      x[k] = psd_part(y);
      psd_increment[k] = y - x[k];
    }

    const double residual = raw_residual(inst, x, mode);
    history.push_back(residual);
    if (residual <= options.tol) {
      std::vector<HermitianMatrix> rhos;
      for (const auto& m : x) rhos.emplace_back(m, 1e-6);
      PetzFeasible cert;
      for (const auto& rho : rhos) {
        const double low = hermitian_eig(rho).values.front();
        cert.cone_violation = std::max(cert.cone_violation, -low);
      }
      cert.rhos = std::move(rhos);
      cert.max_constraint_residual = residual;
      cert.iterations = it;
      return cert;
    }
    const auto window = static_cast<std::size_t>(options.plateau_window);
    if (history.size() > window) {
      const double before = history[history.size() - 1 - window];
      if (before - residual < options.plateau_rel * before && residual > 10.0 * options.tol)
        return PetzNumericallyInfeasible{residual, it};
    }
  }
  std::ostringstream os;
  os << "petz_feasibility: undecided after " << options.max_iters << " iterations (residual "
     << history.back() << ")";
  throw UndecidedError(os.str(), history.back(), options.max_iters);
}

StructuralReport structural_check(const PetzInstance& inst, const PetzFeasible& cert,
                                  double weight_tol, double equality_tol) {
  StructuralReport report;
  for (std::size_t k = 0; k < inst.statistic.size(); ++k) {
    std::vector<std::size_t> loaded;
    for (std::size_t n = 0; n < inst.family.size(); ++n) {
      if (inst.weights[n][k] <= weight_tol) continue;
      loaded.push_back(n);
      const double gap =
          max_abs_diff(cert.rhos.at(k).matrix(), CMatrix::outer(inst.family.vector(n)));
      if (gap > equality_tol) {
        std::ostringstream os;
        os << "atom " << k << " loaded by state '" << inst.family.label(n)
           << "' but rho differs from its projector by " << gap;
        report.violations.push_back(os.str());
      }
    }
    if (loaded.size() > 1) {
      std::ostringstream os;
      os << "atom " << k << " is loaded by " << loaded.size() << " states";
      report.violations.push_back(os.str());
    }
  }
  report.pass = report.violations.empty();
  return report;
}

bool petz_implies_weak_check(const PetzInstance& inst, const PetzFeasible&) {
  return check_weak_sufficiency(inst.statistic, inst.family).sufficient;
}

}  // namespace wsq
