#include "wsq/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>

#include "CLI11.hpp"
#include "wsq/errors.hpp"
#include "wsq/harness.hpp"
#include "wsq/io.hpp"

namespace wsq {

namespace {

// The two-state example: T = diag(1, -1), phi1 = (1, 0), phi2 = (1, 1)/sqrt 2.
constexpr const char* two_state_example = R"({
  "dimension": 2,
  "states": {
    "phi1": [[1, 0], [0, 0]],
    "phi2": [[0.7071067811865476, 0], [0.7071067811865476, 0]]
  },
  "statistic": {"matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}
})";

struct Settings {
  std::string input;
  std::optional<double> tol;
  std::string statistic_source = "from-file";
  std::string witness_out;
  bool non_unital = false;
  int max_iters = PetzOptions{}.max_iters;
  int steps = 72;
  std::uint64_t seed = 2024;
  std::size_t count = 100;
  std::string certificate;
};

double resolve_tol(const std::optional<double>& flag, double fallback) {
  if (flag) return *flag;
  const char* env = std::getenv("WSQ_TOL");
  if (!env || !*env) return fallback;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  if (*end != '\0' || !(v > 0.0) || !std::isfinite(v))
    throw ParseError(std::string("WSQ_TOL: expected a positive number, got '") + env + "'");
  return v;
}

void emit(std::ostream& out, const Json& j) { out << j.dump(2) << "\n"; }

const DiscreteStatistic& require_statistic(const Instance& inst) {
  if (!inst.statistic) throw ParseError("/: missing field 'statistic'");
  return *inst.statistic;
}

int run_check(const Settings& s, std::ostream& out, std::ostream& err) {
  const auto inst = load_instance(s.input);
  SufficiencyOptions options;
  options.rank_tol = resolve_tol(s.tol, options.rank_tol);
  std::optional<DiscreteStatistic> t;
  if (s.statistic_source == "constructed") {
    const auto existence = exists_weakly_sufficient(inst.family, options);
    if (!existence.exists()) {
      err << "no weakly sufficient statistic exists for this family\n";
      emit(out, existence_certificate(existence, options));
      return exit_negative;
    }
    t = existence.constructed->statistic;
  } else {
    t = require_statistic(inst);
  }
  const auto verdict = check_weak_sufficiency(*t, inst.family, options);
  emit(out, weak_certificate(*t, verdict, options, s.statistic_source));
  if (!s.witness_out.empty()) {
    if (!verdict.witness) {
      err << "not sufficient; no witness written to " << s.witness_out << "\n";
    } else {
      std::ofstream file(s.witness_out);
      if (!file) throw ParseError("cannot open '" + s.witness_out + "' for writing");
      file << witness_to_json(*verdict.witness).dump(2) << "\n";
    }
  }
  return verdict.sufficient ? exit_affirmative : exit_negative;
}

int run_construct(const Settings& s, std::ostream& out, std::ostream&) {
  const auto inst = load_instance(s.input);
  SufficiencyOptions options;
  options.rank_tol = resolve_tol(s.tol, options.rank_tol);
  const auto result = exists_weakly_sufficient(inst.family, options);
  emit(out, existence_certificate(result, options));
  return result.exists() ? exit_affirmative : exit_negative;
}

int run_minimal(const Settings& s, std::ostream& out, std::ostream&) {
  const auto inst = load_instance(s.input);
  SufficiencyOptions options;
  options.rank_tol = resolve_tol(s.tol, options.rank_tol);
  const auto& t = require_statistic(inst);
  const auto result = minimal_statistic(t, inst.family, options);
  emit(out, minimality_certificate(t, result, options));
  return result.exists() ? exit_affirmative : exit_negative;
}

int run_petz(const Settings& s, std::ostream& out, std::ostream& err) {
  const auto inst = load_instance(s.input);
  PetzOptions options;
  options.tol = resolve_tol(s.tol, options.tol);
  options.max_iters = s.max_iters;
  const auto pi = make_petz_instance(require_statistic(inst), inst.family, !s.non_unital);
  const auto cert = petz_feasibility(pi, options);
  emit(out, petz_certificate(pi, cert, options));
  if (std::holds_alternative<PetzNumericallyInfeasible>(cert))
    err << "residual plateaued; infeasibility is numerical, not proven\n";
  return std::holds_alternative<PetzFeasible>(cert) ? exit_affirmative : exit_negative;
}

int run_oracle(const Settings& s, std::ostream& out, std::ostream& err) {
  const auto inst = load_instance(s.input);
  SufficiencyOptions options;
  options.rank_tol = resolve_tol(s.tol, options.rank_tol);
  const auto& t = require_statistic(inst);
  const bool checker = check_weak_sufficiency(t, inst.family, options).sufficient;
  const bool brute = brute_force_weak_sufficiency(t, inst.family, s.steps);
  if (checker != brute) err << "checker and brute force disagree\n";
  emit(out, {{"kind", "oracle"},
             {"verdict", checker == brute ? "agree" : "disagree"},
             {"payload", {{"checker", checker}, {"brute_force", brute}, {"phase_steps", s.steps}}},
             {"tolerances", {{"rank_tol", options.rank_tol}}},
             {"tool_version", tool_version}});
  return checker == brute ? exit_affirmative : exit_negative;
}

Json example_result(const std::string& name, bool passed, Json detail) {
  return {{"name", name}, {"passed", passed}, {"detail", std::move(detail)}};
}

Json two_state_examples() {
  const auto inst = parse_instance(two_state_example);
  const auto& t = *inst.statistic;
  Json results = Json::array();

  const auto verdict = check_weak_sufficiency(t, inst.family);
  double residual = INFINITY;
  if (verdict.witness) residual = verify_witness(t, inst.family, *verdict.witness).max_residual;
  results.push_back(example_result("check_sufficient", verdict.sufficient && residual <= 1e-12,
                                   {{"witness_residual", residual}}));

  WitnessFactorization w;
  const double r = 1.0 / std::sqrt(2.0);
  w.chi = CVector{r, r};
  w.functions["phi1"] = {0.0, std::sqrt(2.0)};
  w.functions["phi2"] = {1.0, 1.0};
  w.versions.phases = {{"phi1", 1.0}, {"phi2", 1.0}};
  const auto hand = verify_witness(t, inst.family, w, 1e-12);
  results.push_back(example_result("explicit_witness", hand.ok,
                                   {{"witness_residual", hand.max_residual}}));

  const auto cert = petz_feasibility(make_petz_instance(t, inst.family));
  const auto* orth = std::get_if<PetzInfeasibleOrthogonality>(&cert);
  const double overlap = orth ? std::abs(orth->overlap) : 0.0;
  results.push_back(example_result("petz_orthogonality",
                                   orth && std::abs(overlap - r) <= 1e-12,
                                   {{"overlap_abs", overlap}}));
  return results;
}

int run_selftest(const Settings& s, std::ostream& out, std::ostream& err) {
  const Json examples = two_state_examples();
  bool passed = true;
  for (const auto& e : examples) passed = passed && e["passed"].get<bool>();
  const auto report = run_property_suite(s.seed, s.count);
  passed = passed && report.passed();
  err << "seed " << s.seed << ", " << s.count << " cases per property\n";
  for (const auto& e : examples)
    err << (e["passed"].get<bool>() ? "PASS " : "FAIL ") << e["name"].get<std::string>() << "\n";
  for (const auto& p : report.results)
    err << (p.passed ? "PASS " : "FAIL ") << p.name << " (" << p.failures << "/" << p.cases
        << ")\n";
  emit(out, {{"kind", "selftest"},
             {"verdict", passed ? "pass" : "fail"},
             {"payload", {{"examples", examples}, {"properties", report.to_json()}}},
             {"tool_version", tool_version}});
  return passed ? exit_affirmative : exit_negative;
}

int run_verify(const Settings& s, std::ostream& out, std::ostream& err) {
  const auto inst = load_instance(s.input);
  std::ifstream file(s.certificate);
  if (!file) throw ParseError("cannot open '" + s.certificate + "'");
  Json cert;
  try {
    cert = Json::parse(file);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  RecheckResult result;
  try {
    result = recheck_certificate(inst, cert);
  } catch (const Error& e) {
    result = {Recheck::rejected, e.what()};
  }
  const char* names[] = {"verified", "rejected", "heuristic"};
  const char* status = names[static_cast<int>(result.status)];
  err << status << ": " << result.message << "\n";
  emit(out, {{"kind", "verification"},
             {"verdict", status},
             {"payload", {{"certificate_kind", cert.value("kind", "")}, {"message", result.message}}},
             {"tool_version", tool_version}});
  switch (result.status) {
    case Recheck::verified: return exit_affirmative;
    case Recheck::rejected: return exit_negative;
    default: return exit_error;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weak sufficiency, minimality and Petz sufficiency of discrete quantum statistics",
               "wsq"};
  app.require_subcommand(1);
  Settings s;
  std::function<int(const Settings&, std::ostream&, std::ostream&)> action;

  const auto input = [&](CLI::App* sub) {
    sub->add_option("--input", s.input, "instance file")->required()->check(CLI::ExistingFile);
  };
  const auto tol = [&](CLI::App* sub) {
    sub->add_option("--tol", s.tol, "tolerance; overrides WSQ_TOL")
        ->check(CLI::PositiveNumber);
  };

  auto* check = app.add_subcommand("check", "decide weak sufficiency of the instance statistic");
  input(check);
  tol(check);
  check->add_option("--statistic", s.statistic_source, "from-file or constructed")
      ->check(CLI::IsMember({"from-file", "constructed"}));
  check->add_option("--witness-out", s.witness_out, "write the witness here");
  check->callback([&] { action = run_check; });

  auto* construct = app.add_subcommand("construct", "construct a weakly sufficient statistic");
  input(construct);
  tol(construct);
  construct->callback([&] { action = run_construct; });

  auto* minimal = app.add_subcommand("minimal", "compute the minimal weakly sufficient statistic");
  input(minimal);
  tol(minimal);
  minimal->callback([&] { action = run_minimal; });

  auto* petz = app.add_subcommand("petz", "decide Petz sufficiency");
  input(petz);
  tol(petz);
  petz->add_flag("--non-unital", s.non_unital, "allow trace at most one");
  petz->add_option("--max-iters", s.max_iters, "iteration budget")->check(CLI::PositiveNumber);
  petz->callback([&] { action = run_petz; });

  auto* oracle = app.add_subcommand("oracle", "cross-check against the brute-force oracle");
  input(oracle);
  tol(oracle);
  oracle->add_option("--steps", s.steps, "phase grid steps")->check(CLI::Range(2, 720));
  oracle->callback([&] { action = run_oracle; });

  auto* selftest = app.add_subcommand("selftest", "bundled examples and property suite");
  selftest->add_option("--seed", s.seed, "suite seed");
  selftest->add_option("--count", s.count, "instances per property");
  selftest->callback([&] { action = run_selftest; });

  auto* verify = app.add_subcommand("verify", "re-check a certificate against an instance");
  input(verify);
  verify->add_option("--certificate", s.certificate, "certificate file")
      ->required()
      ->check(CLI::ExistingFile);
  verify->callback([&] { action = run_verify; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return exit_affirmative;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_affirmative;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return exit_error;
  }

  try {
    return action(s, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return exit_error;
}

}  // namespace wsq
