#include "wsq/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "wsq/errors.hpp"

namespace wsq {

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw ParseError((path.empty() ? "/" : path) + ": " + what);
}

const Json& field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) schema_error(path, "missing field '" + key + "'");
  return *it;
}

double number_from_json(const Json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  return j.get<double>();
}

std::size_t index_from_json(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    schema_error(path, "expected a non-negative integer");
  return j.get<std::size_t>();
}

std::string string_from_json(const Json& j, const std::string& path) {
  if (!j.is_string()) schema_error(path, "expected a string");
  return j.get<std::string>();
}

Json tolerances_json(const SufficiencyOptions& o) {
  return {{"rank_tol", o.rank_tol}, {"angle_tol", o.angle_tol}, {"zero_tol", o.zero_tol}};
}

Json constraint_to_json(const PhaseConstraint& c) {
  return {{"left", c.left}, {"right", c.right}, {"value", complex_to_json(c.value)}};
}

PhaseConstraint constraint_from_json(const Json& j, const std::string& path) {
  return {string_from_json(field(j, "left", path), path + "/left"),
          string_from_json(field(j, "right", path), path + "/right"),
          complex_from_json(field(j, "value", path), path + "/value")};
}

Json obstruction_to_json(const PhaseObstruction& o) {
  Json cycle = Json::array();
  for (const auto& c : o.cycle) cycle.push_back(constraint_to_json(c));
  return {{"cycle", cycle}, {"defect", o.defect}};
}

Json versions_to_json(const VersionAssignment& v) {
  Json out = Json::object();
  for (const auto& [label, c] : v.phases) out[label] = complex_to_json(c);
  return out;
}

Json envelope(const std::string& kind, const std::string& verdict, Json payload, Json tolerances) {
  return {{"kind", kind},
          {"verdict", verdict},
          {"payload", std::move(payload)},
          {"tolerances", std::move(tolerances)},
          {"tool_version", tool_version}};
}

// Every constraint of the cycle must be one of the `allowed` constraints
// (same endpoints, value within tol) and the walk must close with a defect.
std::optional<std::string> check_cycle(const std::vector<PhaseConstraint>& cycle,
                                       const std::vector<PhaseConstraint>& allowed,
                                       double angle_tol) {
  for (const auto& c : cycle) {
    bool found = false;
    for (const auto& a : allowed) {
      const bool same = a.left == c.left && a.right == c.right;
      const bool flipped = a.left == c.right && a.right == c.left;
      if (same && std::abs(a.value - c.value) <= 1e-9) found = true;
      if (flipped && std::abs(std::conj(a.value) - c.value) <= 1e-9) found = true;
      if (found) break;
    }
    if (!found)
      return "cycle constraint (" + c.left + ", " + c.right + ") does not match the instance";
  }
  const auto defect = cycle_defect(cycle);
  if (!defect) return std::string("cycle constraints do not form a closed walk");
  if (std::abs(*defect) <= angle_tol) return std::string("cycle has no phase defect");
  return std::nullopt;
}

RecheckResult verified(std::string message) { return {Recheck::verified, std::move(message)}; }
RecheckResult rejected(std::string message) { return {Recheck::rejected, std::move(message)}; }

bool same_statistic(const DiscreteStatistic& a, const DiscreteStatistic& b, double tol) {
  if (a.dim() != b.dim() || a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a.atom(k).eigenvalue - b.atom(k).eigenvalue) > tol) return false;
    if (max_abs_diff(a.atom(k).projection.matrix(), b.atom(k).projection.matrix()) > tol)
      return false;
  }
  return true;
}

SufficiencyOptions options_from(const Json& cert) {
  SufficiencyOptions o;
  auto it = cert.find("tolerances");
  if (it == cert.end() || !it->is_object()) return o;
  o.rank_tol = it->value("rank_tol", o.rank_tol);
  o.angle_tol = it->value("angle_tol", o.angle_tol);
  o.zero_tol = it->value("zero_tol", o.zero_tol);
  return o;
}

RecheckResult recheck_weak(const Instance& inst, const Json& cert) {
  const Json& payload = field(cert, "payload", "");
  const std::string verdict = string_from_json(field(cert, "verdict", ""), "/verdict");
  const auto options = options_from(cert);
  const std::size_t d = inst.family.dim();
  const auto t = statistic_from_json(field(payload, "statistic", "/payload"), d,
                                     "/payload/statistic");
  const std::string source = payload.value("statistic_source", "from-file");
  if (source == "from-file") {
    if (!inst.statistic) return rejected("instance has no statistic");
    if (!same_statistic(t, *inst.statistic, 1e-9))
      return rejected("certificate statistic differs from the instance statistic");
  }
  if (verdict == "sufficient") {
    const auto w = witness_from_json(field(payload, "witness", "/payload"), "/payload/witness");
    const auto check = verify_witness(t, inst.family, w);
    if (!check.ok) {
      std::ostringstream os;
      os << "witness residual " << check.max_residual;
      return rejected(os.str());
    }
    std::ostringstream os;
    os << "witness verifies, max residual " << check.max_residual;
    return verified(os.str());
  }
  if (verdict != "not_sufficient") return rejected("unknown verdict '" + verdict + "'");
  const Json& violations = field(payload, "violations", "/payload");
  if (!violations.is_array() || violations.empty()) return rejected("no violations listed");
  const auto table = project_states(t, inst.family);
  for (std::size_t i = 0; i < violations.size(); ++i) {
    const std::string path = "/payload/violations/" + std::to_string(i);
    const Json& v = violations[i];
    const std::string type = string_from_json(field(v, "type", path), path + "/type");
    if (type == "rank") {
      const std::size_t k = index_from_json(field(v, "atom", path), path + "/atom");
      if (k >= t.size()) return rejected("violation atom out of range");
      const std::size_t rank = numerical_rank(table.components[k], options.rank_tol);
      if (rank < 2) return rejected("atom " + std::to_string(k) + " has rank below two");
    } else if (type == "phase") {
      std::vector<PhaseConstraint> cycle;
      const Json& cj = field(v, "cycle", path);
      if (!cj.is_array()) schema_error(path + "/cycle", "expected an array");
      for (std::size_t c = 0; c < cj.size(); ++c)
        cycle.push_back(constraint_from_json(cj[c], path + "/cycle/" + std::to_string(c)));
      if (auto bad = check_cycle(cycle, atom_constraints(t, inst.family, options.zero_tol),
                                 options.angle_tol))
        return rejected(*bad);
    } else {
      return rejected("unknown violation type '" + type + "'");
    }
  }
  return verified("every listed violation reproduces");
}

RecheckResult recheck_existence(const Instance& inst, const Json& cert) {
  const Json& payload = field(cert, "payload", "");
  const std::string verdict = string_from_json(field(cert, "verdict", ""), "/verdict");
  const auto options = options_from(cert);
  if (verdict == "exists") {
    const auto t = statistic_from_json(field(payload, "statistic", "/payload"),
                                       inst.family.dim(), "/payload/statistic");
    const auto w = witness_from_json(field(payload, "witness", "/payload"), "/payload/witness");
    const auto check = verify_witness(t, inst.family, w);
    if (!check.ok) return rejected("constructed witness does not verify");
    return verified("constructed statistic and witness verify");
  }
  if (verdict != "does_not_exist") return rejected("unknown verdict '" + verdict + "'");
  const Json& cj = field(field(payload, "obstruction", "/payload"), "cycle", "/payload/obstruction");
  if (!cj.is_array()) schema_error("/payload/obstruction/cycle", "expected an array");
  std::vector<PhaseConstraint> cycle;
  for (std::size_t c = 0; c < cj.size(); ++c)
    cycle.push_back(constraint_from_json(cj[c], "/payload/obstruction/cycle/" + std::to_string(c)));
  if (auto bad = check_cycle(cycle, gram_constraints(inst.family, options.zero_tol),
                             options.angle_tol))
    return rejected(*bad);
  return verified("Gram cycle carries a phase defect");
}

RecheckResult recheck_minimality(const Instance& inst, const Json& cert) {
  if (!inst.statistic) return rejected("instance has no statistic");
  const DiscreteStatistic& t = *inst.statistic;
  const Json& payload = field(cert, "payload", "");
  const std::string verdict = string_from_json(field(cert, "verdict", ""), "/verdict");
  const auto options = options_from(cert);
  if (verdict == "minimal_exists") {
    const auto s = statistic_from_json(field(payload, "statistic", "/payload"), t.dim(),
                                       "/payload/statistic");
    if (!check_weak_sufficiency(s, inst.family, options).sufficient)
      return rejected("S is not weakly sufficient");
    if (!is_function_of(s, t)) return rejected("S is not a function of T");
    for (std::size_t a = 0; a < s.size(); ++a)
      for (std::size_t b = a + 1; b < s.size(); ++b) {
        CoarseMap phi{s.eigenvalues()};
        phi.values[b] = phi.values[a];
        if (check_weak_sufficiency(apply_coarse(s, phi).statistic, inst.family, options).sufficient)
          return rejected("atoms of S can be merged further");
      }
    return verified("S is weakly sufficient, a function of T, and admits no further merge");
  }
  if (verdict != "no_minimal_exists") return rejected("unknown verdict '" + verdict + "'");
  const std::size_t dead = index_from_json(field(payload, "dead_atom", "/payload"),
                                           "/payload/dead_atom");
  if (dead >= t.size()) return rejected("dead atom out of range");
  const auto table = project_states(t, inst.family);
  if (numerical_rank(table.components[dead], options.rank_tol) != 0)
    return rejected("atom " + std::to_string(dead) + " is not dead");
  if (!check_weak_sufficiency(t, inst.family, options).sufficient)
    return rejected("T is not weakly sufficient");
  for (const auto& tn : dead_atom_merges(t, dead))
    if (!check_weak_sufficiency(tn, inst.family, options).sufficient)
      return rejected("a merged statistic T_n is not weakly sufficient");
  return verified("dead atom confirmed; every T_n is weakly sufficient");
}

RecheckResult recheck_petz(const Instance& inst, const Json& cert) {
  if (!inst.statistic) return rejected("instance has no statistic");
  const Json& payload = field(cert, "payload", "");
  const std::string verdict = string_from_json(field(cert, "verdict", ""), "/verdict");
  const bool unital = payload.value("unital", true);
  const auto pi = make_petz_instance(*inst.statistic, inst.family, unital);
  if (verdict == "feasible") {
    const Json& rj = field(payload, "rhos", "/payload");
    if (!rj.is_array() || rj.size() != pi.statistic.size())
      schema_error("/payload/rhos", "expected one matrix per atom");
    std::vector<HermitianMatrix> rhos;
    for (std::size_t k = 0; k < rj.size(); ++k)
      rhos.emplace_back(matrix_from_json(rj[k], pi.statistic.dim(),
                                         "/payload/rhos/" + std::to_string(k)),
                        1e-9);
    const double residual = petz_constraint_residual(
        pi, rhos, unital ? TraceMode::equal_one : TraceMode::at_most_one);
    if (residual > 1e-6) return rejected("invariance equations fail");
    for (const auto& rho : rhos)
      if (hermitian_eig(rho).values.front() < -1e-8) return rejected("a density is not PSD");
    return verified("densities satisfy the invariance equations and are PSD");
  }
  if (verdict == "infeasible_orthogonality") {
    const std::string left = string_from_json(field(payload, "left", "/payload"), "/payload/left");
    const std::string right =
        string_from_json(field(payload, "right", "/payload"), "/payload/right");
    const Complex overlap = inner(inst.family.vector(inst.family.index_of(left)),
                                  inst.family.vector(inst.family.index_of(right)));
    if (std::abs(overlap) <= 1e-9) return rejected("the named pair is orthogonal");
    return verified("the named pair overlaps");
  }
  if (verdict == "numerically_infeasible")
    return {Recheck::heuristic, "numerical infeasibility is a heuristic verdict"};
  return rejected("unknown verdict '" + verdict + "'");
}

}  // namespace

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) schema_error(path, "expected an [re, im] pair");
  return {number_from_json(j[0], path + "/0"), number_from_json(j[1], path + "/1")};
}

Json vector_to_json(const CVector& v) {
  Json out = Json::array();
  for (const auto& z : v) out.push_back(complex_to_json(z));
  return out;
}

CVector vector_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array of [re, im] pairs");
  CVector v;
  for (std::size_t i = 0; i < j.size(); ++i)
    v.push_back(complex_from_json(j[i], path + "/" + std::to_string(i)));
  return v;
}

Json matrix_to_json(const CMatrix& m) {
  Json out = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
    out.push_back(std::move(row));
  }
  return out;
}

CMatrix matrix_from_json(const Json& j, std::size_t d, const std::string& path) {
  if (!j.is_array() || j.size() != d) schema_error(path, "expected " + std::to_string(d) + " rows");
  CMatrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const std::string rp = path + "/" + std::to_string(i);
    if (!j[i].is_array() || j[i].size() != d)
      schema_error(rp, "expected " + std::to_string(d) + " entries");
    for (std::size_t k = 0; k < d; ++k) m(i, k) = complex_from_json(j[i][k], rp + "/" + std::to_string(k));
  }
  return m;
}

Json statistic_to_json(const DiscreteStatistic& t) {
  Json values = Json::array(), projections = Json::array();
  for (const auto& a : t.atoms()) {
    values.push_back(a.eigenvalue);
    projections.push_back(matrix_to_json(a.projection.matrix()));
  }
  return {{"eigenvalues", values}, {"projections", projections}};
}

DiscreteStatistic statistic_from_json(const Json& j, std::size_t d, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object");
  const bool has_matrix = j.contains("matrix");
  const bool has_eigen = j.contains("eigenvalues") || j.contains("projections");
  if (has_matrix == has_eigen)
    schema_error(path, "expected exactly one of 'matrix' or 'eigenvalues'/'projections'");
  if (has_matrix) {
    const CMatrix m = matrix_from_json(j["matrix"], d, path + "/matrix");
    return statistic_from_matrix(HermitianMatrix(m));
  }
  const Json& values = field(j, "eigenvalues", path);
  const Json& projections = field(j, "projections", path);
  if (!values.is_array()) schema_error(path + "/eigenvalues", "expected an array");
  if (!projections.is_array() || projections.size() != values.size())
    schema_error(path + "/projections", "expected one matrix per eigenvalue");
  std::vector<double> eigs;
  std::vector<HermitianMatrix> ps;
  for (std::size_t k = 0; k < values.size(); ++k) {
    eigs.push_back(number_from_json(values[k], path + "/eigenvalues/" + std::to_string(k)));
    ps.emplace_back(
        matrix_from_json(projections[k], d, path + "/projections/" + std::to_string(k)));
  }
  return statistic_from_eigen(eigs, ps);
}

Instance instance_from_json(const Json& j) {
  if (!j.is_object()) schema_error("", "expected an object");
  const std::size_t d = index_from_json(field(j, "dimension", ""), "/dimension");
  if (d == 0) schema_error("/dimension", "must be positive");
  const Json& states = field(j, "states", "");
  if (!states.is_object() || states.empty())
    schema_error("/states", "expected a non-empty object of label -> vector");
  std::vector<std::string> labels;
  std::vector<CVector> vecs;
  for (const auto& [label, value] : states.items()) {
    const std::string path = "/states/" + label;
    CVector v = vector_from_json(value, path);
    if (v.size() != d) schema_error(path, "expected " + std::to_string(d) + " entries");
    labels.push_back(label);
    vecs.push_back(std::move(v));
  }
  Instance inst{std::nullopt, StateFamily(labels, vecs)};
  if (j.contains("statistic")) inst.statistic = statistic_from_json(j["statistic"], d, "/statistic");
  return inst;
}

Instance parse_instance(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return instance_from_json(j);
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_instance(buffer.str());
}

Json instance_to_json(const Instance& inst) {
  Json states = Json::object();
  for (std::size_t i = 0; i < inst.family.size(); ++i)
    states[inst.family.label(i)] = vector_to_json(inst.family.vector(i));
  Json out = {{"dimension", inst.family.dim()}, {"states", states}};
  if (inst.statistic) out["statistic"] = statistic_to_json(*inst.statistic);
  return out;
}

std::string serialize_instance(const Instance& inst) { return instance_to_json(inst).dump(2); }

Json witness_to_json(const WitnessFactorization& w) {
  Json functions = Json::object();
  for (const auto& [label, values] : w.functions) functions[label] = values;
  return {{"chi", vector_to_json(w.chi)},
          {"functions", functions},
          {"versions", versions_to_json(w.versions)}};
}

WitnessFactorization witness_from_json(const Json& j, const std::string& path) {
  WitnessFactorization w;
  w.chi = vector_from_json(field(j, "chi", path), path + "/chi");
  const Json& functions = field(j, "functions", path);
  if (!functions.is_object()) schema_error(path + "/functions", "expected an object");
  for (const auto& [label, values] : functions.items()) {
    const std::string fp = path + "/functions/" + label;
    if (!values.is_array()) schema_error(fp, "expected an array");
    SpectralFunction f;
    for (std::size_t k = 0; k < values.size(); ++k)
      f.push_back(number_from_json(values[k], fp + "/" + std::to_string(k)));
    w.functions[label] = std::move(f);
  }
  const Json& versions = field(j, "versions", path);
  if (!versions.is_object()) schema_error(path + "/versions", "expected an object");
  for (const auto& [label, value] : versions.items())
    w.versions.phases[label] = complex_from_json(value, path + "/versions/" + label);
  return w;
}

Json weak_certificate(const DiscreteStatistic& t, const SufficiencyVerdict& verdict,
                      const SufficiencyOptions& options, const std::string& statistic_source) {
  Json payload = {{"statistic", statistic_to_json(t)}, {"statistic_source", statistic_source}};
  if (verdict.sufficient) {
    payload["witness"] = witness_to_json(*verdict.witness);
    return envelope("weak_sufficiency", "sufficient", std::move(payload), tolerances_json(options));
  }
  Json violations = Json::array();
  for (const auto& v : verdict.violations) {
    if (const auto* rv = std::get_if<RankViolation>(&v)) {
      violations.push_back(
          {{"type", "rank"}, {"atom", rv->atom}, {"eigenvalue", rv->eigenvalue}, {"dim", rv->dim}});
    } else {
      Json o = obstruction_to_json(std::get<PhaseViolation>(v).obstruction);
      o["type"] = "phase";
      violations.push_back(std::move(o));
    }
  }
  payload["violations"] = std::move(violations);
  return envelope("weak_sufficiency", "not_sufficient", std::move(payload),
                  tolerances_json(options));
}

Json existence_certificate(const ExistenceResult& result, const SufficiencyOptions& options) {
  if (!result.exists())
    return envelope("existence", "does_not_exist",
                    {{"obstruction", obstruction_to_json(*result.obstruction)}},
                    tolerances_json(options));
  const auto& c = *result.constructed;
  return envelope("existence", "exists",
                  {{"statistic", statistic_to_json(c.statistic)},
                   {"witness", witness_to_json(c.witness)},
                   {"gram_versions", versions_to_json(c.versions)},
                   {"basis_labels", c.basis_labels}},
                  tolerances_json(options));
}

Json minimality_certificate(const DiscreteStatistic& t, const MinimalResult& result,
                            const SufficiencyOptions& options) {
  Json classes = Json::array();
  for (const auto& cls : result.atom_classes.classes) classes.push_back(cls);
  Json payload = {{"classes", classes},
                  {"transitivity_residual", result.atom_classes.transitivity_residual}};
  if (result.exists()) {
    payload["statistic"] = statistic_to_json(*result.statistic);
    const auto psi = is_function_of(*result.statistic, t);
    if (psi) payload["psi"] = *psi;
    return envelope("minimality", "minimal_exists", std::move(payload), tolerances_json(options));
  }
  payload["dead_atom"] = *result.dead_atom;
  payload["dead_eigenvalue"] = t.atom(*result.dead_atom).eigenvalue;
  Json merges = Json::array();
  for (const auto& tn : dead_atom_merges(t, *result.dead_atom))
    merges.push_back(statistic_to_json(tn));
  payload["merged_statistics"] = std::move(merges);
  return envelope("minimality", "no_minimal_exists", std::move(payload), tolerances_json(options));
}

Json petz_certificate(const PetzInstance& inst, const PetzCertificate& cert,
                      const PetzOptions& options) {
  Json tolerances = {{"tol", options.tol},
                     {"orthogonality_tol", options.orthogonality_tol},
                     {"max_iters", options.max_iters}};
  Json payload = {{"unital", inst.unital}};
  if (const auto* ok = std::get_if<PetzFeasible>(&cert)) {
    Json rhos = Json::array();
    for (const auto& rho : ok->rhos) rhos.push_back(matrix_to_json(rho.matrix()));
    payload["rhos"] = std::move(rhos);
    payload["max_constraint_residual"] = ok->max_constraint_residual;
    payload["cone_violation"] = ok->cone_violation;
    payload["iterations"] = ok->iterations;
    const auto report = structural_check(inst, *ok);
    payload["structural_check"] = {{"pass", report.pass}, {"violations", report.violations}};
    return envelope("petz", "feasible", std::move(payload), std::move(tolerances));
  }
  if (const auto* orth = std::get_if<PetzInfeasibleOrthogonality>(&cert)) {
    payload["left"] = orth->left;
    payload["right"] = orth->right;
    payload["overlap"] = complex_to_json(orth->overlap);
    payload["overlap_abs"] = std::abs(orth->overlap);
    return envelope("petz", "infeasible_orthogonality", std::move(payload), std::move(tolerances));
  }
  const auto& stuck = std::get<PetzNumericallyInfeasible>(cert);
  payload["residual_floor"] = stuck.residual_floor;
  payload["iterations"] = stuck.iterations;
  payload["note"] = "heuristic: alternating projections stalled; not a proof of infeasibility";
  return envelope("petz", "numerically_infeasible", std::move(payload), std::move(tolerances));
}

RecheckResult recheck_certificate(const Instance& inst, const Json& certificate) {
  const std::string kind = string_from_json(field(certificate, "kind", ""), "/kind");
  if (kind == "weak_sufficiency") return recheck_weak(inst, certificate);
  if (kind == "existence") return recheck_existence(inst, certificate);
  if (kind == "minimality") return recheck_minimality(inst, certificate);
  if (kind == "petz") return recheck_petz(inst, certificate);
  return rejected("unknown certificate kind '" + kind + "'");
}

}  // namespace wsq
