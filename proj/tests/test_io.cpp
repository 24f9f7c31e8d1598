#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "test_support.hpp"
#include "wsq/errors.hpp"
#include "wsq/harness.hpp"
#include "wsq/io.hpp"

using namespace wsq;
using namespace wsq::testing;

namespace {

const std::string instances_dir = WSQ_INSTANCES_DIR;

std::string two_state_text(const std::string& phi1) {
  return R"({"dimension": 2, "states": {"phi1": )" + phi1 +
         R"(, "phi2": [[0.7071067811865476, 0], [0.7071067811865476, 0]]},
            "statistic": {"matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}})";
}

std::string error_of(const std::string& text) {
  try {
    parse_instance(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("shipped two-state instance") {
  const auto inst = load_instance(instances_dir + "/two_state.json");
  REQUIRE(inst.statistic);
  CHECK(inst.statistic->eigenvalues() == std::vector<double>{-1.0, 1.0});
  CHECK(max_abs_diff(inst.statistic->matrix(), CMatrix::diagonal(std::vector<double>{1.0, -1.0})) ==
        0.0);
  CHECK(inst.family.labels() == std::vector<std::string>{"phi1", "phi2"});
  CHECK(max_abs_diff(inst.family.vector(1), two_state_family().vector(1)) <= 1e-15);
}

TEST_CASE("schema errors carry a path") {
  CHECK(error_of("{").find("invalid JSON") != std::string::npos);
  CHECK(error_of(R"({"states": {}})") == "/: missing field 'dimension'");
  CHECK(error_of(two_state_text(R"([[1, 0], [0]])")) == "/states/phi1/1: expected an [re, im] pair");
  CHECK(error_of(two_state_text(R"([[1, 0], [0, "x"]])")) == "/states/phi1/1/1: expected a number");
  CHECK(error_of(two_state_text(R"([[1, 0]])")) == "/states/phi1: expected 2 entries");
  CHECK(error_of(R"({"dimension": 1, "states": {"a": [[1, 0]]}, "statistic": {}})")
            .find("/statistic") == 0);
  CHECK_THROWS_AS(load_instance(instances_dir + "/malformed.json"), ParseError);
  CHECK_THROWS_AS(load_instance(instances_dir + "/does_not_exist.json"), ParseError);
}

TEST_CASE("invariant errors name the defect") {
  CHECK(error_of(two_state_text("[[0.9, 0], [0, 0]]")) == "state 'phi1' not unit norm");
  const std::string dropped = R"({"dimension": 2, "states": {"a": [[1, 0], [0, 0]]},
      "statistic": {"eigenvalues": [1], "projections": [[[[1, 0], [0, 0]], [[0, 0], [0, 0]]]]}})";
  CHECK(error_of(dropped).find("sum to the identity") != std::string::npos);
}

TEST_CASE("statistic is optional") {
  const auto inst = parse_instance(R"({"dimension": 1, "states": {"a": [[0, 1]]}})");
  CHECK_FALSE(inst.statistic);
  CHECK(inst.family.vector(0)[0] == Complex(0.0, 1.0));
}

TEST_CASE("serialize then parse is the identity") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = generate({2 + seed % 6, 1 + seed % 4, Flavor::complex_vectors, seed});
    const std::string text = serialize_instance(inst);
    const auto back = parse_instance(text);
    CHECK(serialize_instance(back) == text);
    for (std::size_t i = 0; i < inst.family.size(); ++i)
      CHECK(max_abs_diff(back.family.vector(i), inst.family.vector(i)) <= 1e-15);
    REQUIRE(back.statistic);
    CHECK(max_abs_diff(back.statistic->matrix(), inst.statistic->matrix()) <= 1e-15);
  }
}

TEST_CASE("weak sufficiency certificates recheck") {
  const auto inst = load_instance(instances_dir + "/two_state.json");
  const auto verdict = check_weak_sufficiency(*inst.statistic, inst.family);
  auto cert = weak_certificate(*inst.statistic, verdict, {}, "from-file");
  CHECK(cert["kind"] == "weak_sufficiency");
  CHECK(cert["verdict"] == "sufficient");
  CHECK(cert["tool_version"] == tool_version);
  const auto reparsed = Json::parse(cert.dump());
  CHECK(recheck_certificate(inst, reparsed).status == Recheck::verified);

  SUBCASE("a tampered witness is rejected") {
    cert["payload"]["witness"]["functions"]["phi1"][1] = 1.0;
    CHECK(recheck_certificate(inst, cert).status == Recheck::rejected);
  }
  SUBCASE("a foreign statistic is rejected") {
    cert["payload"]["statistic"]["eigenvalues"][0] = -2.0;
    CHECK(recheck_certificate(inst, cert).status == Recheck::rejected);
  }
}

TEST_CASE("negative certificates recheck") {
  SUBCASE("rank") {
    const auto inst = load_instance(instances_dir + "/rank_violation.json");
    const auto verdict = check_weak_sufficiency(*inst.statistic, inst.family);
    REQUIRE_FALSE(verdict.sufficient);
    auto cert = weak_certificate(*inst.statistic, verdict, {}, "from-file");
    CHECK(cert["payload"]["violations"][0]["type"] == "rank");
    CHECK(recheck_certificate(inst, cert).status == Recheck::verified);
    cert["payload"]["violations"][0]["atom"] = 1;
    CHECK(recheck_certificate(inst, cert).status == Recheck::rejected);
  }
  SUBCASE("phase") {
    const auto inst = load_instance(instances_dir + "/twisted_triangle.json");
    const auto verdict = check_weak_sufficiency(*inst.statistic, inst.family);
    REQUIRE_FALSE(verdict.sufficient);
    auto cert = weak_certificate(*inst.statistic, verdict, {}, "from-file");
    CHECK(recheck_certificate(inst, cert).status == Recheck::verified);
    cert["payload"]["violations"][0]["cycle"][0]["value"] = Json::array({0.25, 0.0});
    CHECK(recheck_certificate(inst, cert).status == Recheck::rejected);
  }
  SUBCASE("existence obstruction") {
    const auto inst = load_instance(instances_dir + "/twisted_triangle.json");
    const auto cert = existence_certificate(exists_weakly_sufficient(inst.family), {});
    CHECK(cert["verdict"] == "does_not_exist");
    CHECK(recheck_certificate(inst, cert).status == Recheck::verified);
  }
}

TEST_CASE("existence and minimality certificates recheck") {
  const auto paired = load_instance(instances_dir + "/paired.json");
  const auto exist = existence_certificate(exists_weakly_sufficient(paired.family), {});
  CHECK(exist["verdict"] == "exists");
  CHECK(recheck_certificate(paired, exist).status == Recheck::verified);

  const auto minimal =
      minimality_certificate(*paired.statistic, minimal_statistic(*paired.statistic, paired.family), {});
  CHECK(minimal["verdict"] == "minimal_exists");
  CHECK(minimal["payload"]["psi"] == Json::array({1.0, 1.0, 2.0}));
  CHECK(recheck_certificate(paired, minimal).status == Recheck::verified);

  // Claiming T itself is minimal fails: two of its atoms merge.
  auto bogus = minimal;
  bogus["payload"]["statistic"] = statistic_to_json(*paired.statistic);
  CHECK(recheck_certificate(paired, bogus).status == Recheck::rejected);

  const auto dead = load_instance(instances_dir + "/dead_atom.json");
  const auto none =
      minimality_certificate(*dead.statistic, minimal_statistic(*dead.statistic, dead.family), {});
  CHECK(none["verdict"] == "no_minimal_exists");
  CHECK(none["payload"]["dead_atom"] == 2);
  CHECK(none["payload"]["merged_statistics"].size() == 2);
  CHECK(recheck_certificate(dead, none).status == Recheck::verified);
}

TEST_CASE("petz certificates recheck") {
  const auto s4 = load_instance(instances_dir + "/two_state.json");
  const auto s4_pi = make_petz_instance(*s4.statistic, s4.family);
  const auto orth = petz_certificate(s4_pi, petz_feasibility(s4_pi), {});
  CHECK(orth["verdict"] == "infeasible_orthogonality");
  CHECK(orth["payload"]["left"] == "phi1");
  CHECK(orth["payload"]["right"] == "phi2");
  CHECK(std::abs(orth["payload"]["overlap_abs"].get<double>() - inv_sqrt2) <= 1e-12);
  CHECK(recheck_certificate(s4, orth).status == Recheck::verified);

  const auto basis = load_instance(instances_dir + "/basis_pair.json");
  const auto basis_pi = make_petz_instance(*basis.statistic, basis.family);
  auto feasible = petz_certificate(basis_pi, petz_feasibility(basis_pi), {});
  CHECK(feasible["verdict"] == "feasible");
  CHECK(feasible["payload"]["structural_check"]["pass"] == true);
  CHECK(recheck_certificate(basis, Json::parse(feasible.dump())).status == Recheck::verified);
  feasible["payload"]["rhos"][0] = matrix_to_json(CMatrix::identity(3) * Complex(1.0 / 3.0));
  CHECK(recheck_certificate(basis, feasible).status == Recheck::rejected);

  const auto single = Instance{statistic_from_matrix(HermitianMatrix(CMatrix::identity(3))),
                               basis.family};
  const auto single_pi = make_petz_instance(*single.statistic, single.family);
  const auto stuck = petz_certificate(single_pi, petz_feasibility(single_pi), {});
  CHECK(stuck["verdict"] == "numerically_infeasible");
  CHECK(recheck_certificate(single, stuck).status == Recheck::heuristic);
}

TEST_CASE("unknown certificate kind") {
  const auto s4 = load_instance(instances_dir + "/two_state.json");
  CHECK(recheck_certificate(s4, Json{{"kind", "other"}}).status == Recheck::rejected);
  CHECK_THROWS_AS(recheck_certificate(s4, Json::object()), ParseError);
}
