#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "wsq/errors.hpp"
#include "wsq/sufficiency.hpp"

using namespace wsq;
using namespace wsq::testing;

namespace {

const Complex I{0.0, 1.0};

// Three states on C³ whose pairwise overlaps close to a quarter turn.
StateFamily twisted_triangle() {
  return StateFamily({"a", "b", "c"}, {CVector{inv_sqrt2, inv_sqrt2, 0.0},
                                       CVector{0.0, inv_sqrt2, inv_sqrt2},
                                       CVector{inv_sqrt2, 0.0, I * inv_sqrt2}});
}

StateFamily random_family(std::mt19937_64& rng, std::size_t n, std::size_t d, bool real) {
  std::vector<std::string> labels;
  std::vector<CVector> vecs;
  for (std::size_t i = 0; i < n; ++i) {
    labels.push_back("s" + std::to_string(i));
    vecs.push_back(random_unit(d, rng, real));
  }
  return StateFamily(labels, vecs);
}

StateFamily rephased(const StateFamily& f, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  std::vector<CVector> vecs;
  for (std::size_t i = 0; i < f.size(); ++i)
    vecs.push_back(scaled(f.vector(i), std::polar(1.0, angle(rng))));
  return StateFamily(f.labels(), vecs);
}

WitnessFactorization two_state_witness() {
  WitnessFactorization w;
  w.chi = CVector{inv_sqrt2, inv_sqrt2};
  // Atoms in ascending order: λ = −1, λ = 1.
  w.functions["phi1"] = {0.0, std::sqrt(2.0)};
  w.functions["phi2"] = {1.0, 1.0};
  w.versions.phases = {{"phi1", 1.0}, {"phi2", 1.0}};
  return w;
}

}  // namespace

TEST_CASE("two-state example") {
  const auto t = two_state_statistic();
  const auto f = two_state_family();

  SUBCASE("hand-written witness verifies") {
    const auto check = verify_witness(t, f, two_state_witness(), 1e-12);
    CHECK(check.ok);
    CHECK(check.max_residual <= 1e-12);
  }
  SUBCASE("perturbed witness fails") {
    auto w = two_state_witness();
    w.functions["phi1"][1] += 1e-3;
    const auto check = verify_witness(t, f, w);
    CHECK_FALSE(check.ok);
    CHECK(check.max_residual >= 5e-4);
  }
  SUBCASE("zero functions fail") {
    auto w = two_state_witness();
    w.functions["phi1"] = {0.0, 0.0};
    w.functions["phi2"] = {0.0, 0.0};
    CHECK_FALSE(verify_witness(t, f, w).ok);
  }
  SUBCASE("malformed witness") {
    auto w = two_state_witness();
    w.functions.erase("phi2");
    const auto check = verify_witness(t, f, w);
    CHECK_FALSE(check.ok);
    CHECK(std::isinf(check.max_residual));
  }
  SUBCASE("checker produces a verifying witness") {
    const auto verdict = check_weak_sufficiency(t, f);
    REQUIRE(verdict.sufficient);
    CHECK(verdict.violations.empty());
    CHECK(verify_witness(t, f, *verdict.witness, 1e-12).ok);
  }
}

TEST_CASE("rank violation") {
  const auto t = diagonal_statistic({1.0, 1.0, 2.0});
  const StateFamily f({"x", "y"}, {CVector{1.0, 0.0, 0.0}, CVector{0.0, 1.0, 0.0}});
  const auto verdict = check_weak_sufficiency(t, f);
  CHECK_FALSE(verdict.sufficient);
  REQUIRE(verdict.violations.size() == 1);
  const auto* rv = std::get_if<RankViolation>(&verdict.violations[0]);
  REQUIRE(rv);
  CHECK(rv->atom == 0);
  CHECK(rv->eigenvalue == 1.0);
  CHECK(rv->dim == 2);

  SUBCASE("skipping the rank test yields a witness that does not verify") {
    SufficiencyOptions wrong;
    wrong.enforce_rank = false;
    const auto bad = check_weak_sufficiency(t, f, wrong);
    REQUIRE(bad.sufficient);
    CHECK_FALSE(verify_witness(t, f, *bad.witness).ok);
  }
}

TEST_CASE("phase violation") {
  const auto t = diagonal_statistic({1.0, 2.0, 3.0});
  const auto f = twisted_triangle();
  const auto verdict = check_weak_sufficiency(t, f);
  CHECK_FALSE(verdict.sufficient);
  REQUIRE(verdict.violations.size() == 1);
  const auto* pv = std::get_if<PhaseViolation>(&verdict.violations[0]);
  REQUIRE(pv);
  CHECK(pv->obstruction.cycle.size() == 3);
  CHECK(std::abs(std::abs(pv->obstruction.defect) - 1.5707963267948966) < 1e-9);
  CHECK(verdict.gamma.has_value());
}

TEST_CASE("dimension mismatch") {
  CHECK_THROWS_AS(check_weak_sufficiency(diagonal_statistic({1.0, 2.0, 3.0}), two_state_family()),
                  DimensionError);
}

TEST_CASE("existence") {
  SUBCASE("two-state family") {
    const auto f = two_state_family();
    const auto r = exists_weakly_sufficient(f);
    REQUIRE(r.exists());
    const auto& c = *r.constructed;
    CHECK(c.basis_labels == std::vector<std::string>{"phi1", "phi2"});
    CHECK(c.statistic.size() == 2);
    CHECK(verify_witness(c.statistic, f, c.witness).ok);
  }
  SUBCASE("complement atom carries eigenvalue zero") {
    const StateFamily f({"u", "v"}, {CVector{1.0, 0.0, 0.0}, CVector{inv_sqrt2, inv_sqrt2, 0.0}});
    const auto r = exists_weakly_sufficient(f);
    REQUIRE(r.exists());
    const auto& t = r.constructed->statistic;
    REQUIRE(t.size() == 3);
    CHECK(t.eigenvalues() == std::vector<double>{0.0, 1.0, 2.0});
    CHECK(std::abs(t.atom(0).projection.matrix()(2, 2) - 1.0) < 1e-12);
  }
  SUBCASE("dependent states are skipped") {
    const StateFamily f({"a", "b", "c"}, {CVector{1.0, 0.0}, CVector{0.0, 1.0},
                                          CVector{inv_sqrt2, -inv_sqrt2}});
    const auto r = exists_weakly_sufficient(f);
    REQUIRE(r.exists());
    CHECK(r.constructed->basis_labels == std::vector<std::string>{"a", "b"});
    CHECK(verify_witness(r.constructed->statistic, f, r.constructed->witness).ok);
  }
  SUBCASE("twisted triangle has no weakly sufficient statistic") {
    const auto r = exists_weakly_sufficient(twisted_triangle());
    CHECK_FALSE(r.exists());
    REQUIRE(r.obstruction);
    CHECK(r.obstruction->cycle.size() == 3);
  }
}

TEST_CASE("real families always admit a construction") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = random_family(rng, 2 + trial % 4, 2 + trial % 5, true);
    const auto g = rephased(f, rng);
    const auto again = exists_weakly_sufficient(g);
    REQUIRE(again.exists());
    CHECK(verify_witness(again.constructed->statistic, g, again.constructed->witness).ok);
  }
}

TEST_CASE("generic complex triples are obstructed") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = random_family(rng, 3, 3, false);
    const Complex triple = inner(f.vector(0), f.vector(1)) * inner(f.vector(1), f.vector(2)) *
                           inner(f.vector(2), f.vector(0));
    const bool real_triple = std::abs(std::sin(std::arg(triple))) < 1e-6;
    CHECK(exists_weakly_sufficient(f).exists() == real_triple);
  }
}

TEST_CASE("verdict is invariant under a change of versions") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t d = 3 + trial % 3;
    std::vector<double> values;
    for (std::size_t i = 0; i < d; ++i) values.push_back(static_cast<double>(i % (d - 1)));
    const auto t = diagonal_statistic(values);
    const auto f = random_family(rng, 2, d, trial % 2 == 0);
    const auto g = rephased(f, rng);
    const auto vf = check_weak_sufficiency(t, f);
    const auto vg = check_weak_sufficiency(t, g);
    CHECK(vf.sufficient == vg.sufficient);
    if (vg.sufficient) CHECK(verify_witness(t, g, *vg.witness).ok);
  }
}

TEST_CASE("every positive verdict carries a verifying witness") {
  std::mt19937_64 rng(37);
  int positive = 0;
  for (int trial = 0; trial < 100; ++trial) {
    // States built from one vector per atom: sufficient whenever the per-atom
    // overlaps admit real versions.
    const std::size_t atoms = 2 + trial % 3;
    const std::size_t d = atoms + trial % 2;
    std::vector<double> values;
    for (std::size_t i = 0; i < d; ++i) values.push_back(static_cast<double>(std::min(i, atoms - 1)));
    const auto t = diagonal_statistic(values);
    std::vector<std::string> labels;
    std::vector<CVector> vecs;
    std::normal_distribution<double> n(0.0, 1.0);
    for (int s = 0; s < 3; ++s) {
      CVector v(d, 0.0);
      for (std::size_t i = 0; i < d; ++i)
        v[i] = (trial % 4 == 0 ? random_complex(rng) : Complex(n(rng), 0.0));
      labels.push_back("s" + std::to_string(s));
      vecs.push_back(scaled(v, 1.0 / norm(v)));
    }
    const StateFamily f(labels, vecs);
    const auto verdict = check_weak_sufficiency(t, f);
    if (verdict.sufficient) {
      ++positive;
      CHECK(verify_witness(t, f, *verdict.witness).ok);
    } else {
      CHECK_FALSE(verdict.violations.empty());
    }
  }
  CHECK(positive > 10);
}
