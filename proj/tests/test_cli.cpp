#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wsq/cli.hpp"
#include "wsq/io.hpp"

using namespace wsq;

namespace {

const std::string instances_dir = WSQ_INSTANCES_DIR;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string instance(const std::string& name) { return instances_dir + "/" + name + ".json"; }

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("wsq_test_cli_" + name);
}

}  // namespace

TEST_CASE("two-state example") {
  const auto check = run({"check", "--input", instance("two_state")});
  CHECK(check.code == exit_affirmative);
  const auto cert = check.json();
  CHECK(cert["kind"] == "weak_sufficiency");
  CHECK(cert["verdict"] == "sufficient");
  CHECK(cert["payload"].contains("witness"));

  const auto petz = run({"petz", "--input", instance("two_state")});
  CHECK(petz.code == exit_negative);
  const auto pc = petz.json();
  CHECK(pc["verdict"] == "infeasible_orthogonality");
  CHECK(pc["payload"]["left"] == "phi1");
  CHECK(pc["payload"]["right"] == "phi2");
  CHECK(std::abs(pc["payload"]["overlap_abs"].get<double>() - 1.0 / std::sqrt(2.0)) <= 1e-12);
}

TEST_CASE("exit-code contract over the instance corpus") {
  struct Expect {
    std::string name;
    int check, construct, minimal, petz;
  };
  const std::vector<Expect> table = {
      {"two_state", 0, 0, 0, 1},       {"paired", 0, 0, 0, 1},
      {"dead_atom", 0, 0, 1, 1},      {"basis_pair", 0, 0, 1, 0},
      {"rank_violation", 1, 0, 2, 1}, {"twisted_triangle", 1, 1, 2, 1},
      {"malformed", 2, 2, 2, 2},
  };
  for (const auto& e : table) {
    INFO(e.name);
    const auto path = instance(e.name);
    CHECK(run({"check", "--input", path}).code == e.check);
    CHECK(run({"construct", "--input", path}).code == e.construct);
    CHECK(run({"minimal", "--input", path}).code == e.minimal);
    CHECK(run({"petz", "--input", path}).code == e.petz);
    const auto oracle = run({"oracle", "--input", path});
    CHECK(oracle.code == (e.name == "malformed" ? 2 : 0));
  }
}

TEST_CASE("errors and usage") {
  const auto malformed = run({"check", "--input", instance("malformed")});
  CHECK(malformed.code == exit_error);
  CHECK(malformed.out.empty());
  CHECK(malformed.err.find("expected an [re, im] pair") != std::string::npos);

  const auto unknown = run({"check", "--input", instance("two_state"), "--bogus"});
  CHECK(unknown.code == exit_error);
  CHECK(unknown.err.find("--bogus") != std::string::npos);
  CHECK(unknown.err.find("Usage") != std::string::npos);

  CHECK(run({}).code == exit_error);
  CHECK(run({"frobnicate"}).code == exit_error);
  CHECK(run({"check"}).code == exit_error);
  CHECK(run({"check", "--input", instance("does_not_exist")}).code == exit_error);
  CHECK(run({"check", "--input", instance("two_state"), "--statistic", "other"}).code ==
        exit_error);
  CHECK(run({"petz", "--input", instance("two_state"), "--max-iters", "0"}).code == exit_error);

  const auto help = run({"--help"});
  CHECK(help.code == exit_affirmative);
  CHECK(help.out.find("selftest") != std::string::npos);
}

TEST_CASE("tolerance precedence") {
  const auto rank_tol = [](const Run& r) {
    return r.json()["tolerances"]["rank_tol"].get<double>();
  };
  const auto path = instance("two_state");
  ::unsetenv("WSQ_TOL");
  CHECK(rank_tol(run({"check", "--input", path})) == 1e-8);
  ::setenv("WSQ_TOL", "1e-5", 1);
  CHECK(rank_tol(run({"check", "--input", path})) == 1e-5);
  CHECK(rank_tol(run({"check", "--input", path, "--tol", "1e-6"})) == 1e-6);
  CHECK(run({"petz", "--input", path}).json()["tolerances"]["tol"] == 1e-5);
  ::setenv("WSQ_TOL", "abc", 1);
  CHECK(run({"check", "--input", path}).code == exit_error);
  ::unsetenv("WSQ_TOL");
}

TEST_CASE("statistic source and witness output") {
  const auto witness = scratch("witness.json");
  std::filesystem::remove(witness);
  const auto r = run({"check", "--input", instance("paired"), "--statistic", "constructed",
                      "--witness-out", witness.string()});
  CHECK(r.code == exit_affirmative);
  CHECK(r.json()["payload"]["statistic_source"] == "constructed");
  std::ifstream file(witness);
  REQUIRE(file);
  const auto w = witness_from_json(Json::parse(file), "");
  CHECK(w.chi.size() == 3);

  const auto none = run({"check", "--input", instance("twisted_triangle"), "--statistic",
                         "constructed"});
  CHECK(none.code == exit_negative);
  CHECK(none.json()["kind"] == "existence");
}

TEST_CASE("emitted certificates verify") {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"check", "two_state"},       {"check", "rank_violation"}, {"check", "twisted_triangle"},
      {"construct", "paired"},     {"construct", "twisted_triangle"},
      {"minimal", "paired"},       {"minimal", "dead_atom"},
      {"petz", "two_state"},        {"petz", "basis_pair"},
  };
  const auto cert_path = scratch("certificate.json");
  for (const auto& [command, name] : cases) {
    INFO(command << " " << name);
    const auto r = run({command, "--input", instance(name)});
    REQUIRE(r.code != exit_error);
    std::ofstream(cert_path) << r.out;
    const auto v = run({"verify", "--input", instance(name), "--certificate", cert_path.string()});
    CHECK(v.code == exit_affirmative);
    CHECK(v.json()["verdict"] == "verified");
  }

  // A certificate for one instance does not verify against another.
  std::ofstream(cert_path) << run({"check", "--input", instance("two_state")}).out;
  CHECK(run({"verify", "--input", instance("paired"), "--certificate", cert_path.string()}).code ==
        exit_negative);
}

TEST_CASE("non-unital petz") {
  const auto r = run({"petz", "--input", instance("basis_pair"), "--non-unital"});
  CHECK(r.code == exit_affirmative);
  CHECK(r.json()["payload"]["unital"] == false);
}

TEST_CASE("selftest") {
  const auto r = run({"selftest", "--seed", "7", "--count", "5"});
  CHECK(r.code == exit_affirmative);
  const auto j = r.json();
  CHECK(j["verdict"] == "pass");
  CHECK(j["payload"]["properties"]["seed"] == 7);
  CHECK(j["payload"]["examples"].size() == 3);
  CHECK(r.err.find("seed 7") != std::string::npos);
}
