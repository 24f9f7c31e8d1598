#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "wsq/errors.hpp"
#include "wsq/phases.hpp"

using namespace wsq;

namespace {

constexpr double pi = std::numbers::pi;
const Complex I{0.0, 1.0};

const std::vector<std::string> abc{"a", "b", "c"};

// Random constraints whose arguments are multiples of 2π/steps.
std::vector<PhaseConstraint> grid_instance(std::mt19937_64& rng, std::size_t n_labels, int steps,
                                           std::vector<std::string>& labels) {
  labels.clear();
  for (std::size_t i = 0; i < n_labels; ++i) labels.push_back(std::string(1, char('a' + i)));
  std::uniform_int_distribution<int> angle(0, steps - 1);
  std::uniform_real_distribution<double> mag(0.2, 2.0);
  std::bernoulli_distribution keep(0.6);
  std::vector<PhaseConstraint> cs;
  for (std::size_t i = 0; i < n_labels; ++i)
    for (std::size_t j = i + 1; j < n_labels; ++j)
      if (keep(rng))
        cs.push_back({labels[i], labels[j], std::polar(mag(rng), 2.0 * pi * angle(rng) / steps)});
  return cs;
}

}  // namespace

TEST_CASE("align_phases small cases") {
  SUBCASE("no constraints") {
    const auto r = align_phases({}, abc);
    REQUIRE(r.feasible());
    for (const auto& l : abc) CHECK(r.versions->phase(l) == Complex(1.0));
  }
  SUBCASE("two labels") {
    const std::vector<PhaseConstraint> cs{{"a", "b", std::polar(0.5, pi / 3.0)}};
    const auto r = align_phases(cs, {"a", "b"});
    REQUIRE(r.feasible());
    CHECK(r.versions->phase("a") == Complex(1.0));
    CHECK(max_normalized_residual(cs, *r.versions) <= 1e-12);
  }
  SUBCASE("negative reals are accepted mod pi") {
    const std::vector<PhaseConstraint> cs{{"a", "b", -1.0}, {"b", "c", -2.0}, {"a", "c", 3.0}};
    const auto r = align_phases(cs, abc);
    REQUIRE(r.feasible());
    CHECK(max_normalized_residual(cs, *r.versions) <= 1e-12);
  }
  SUBCASE("negative reals are rejected by the 2pi modulus") {
    const std::vector<PhaseConstraint> cs{{"a", "b", -1.0}, {"b", "c", 2.0}, {"a", "c", 3.0}};
    CHECK(align_phases(cs, abc).feasible());
    const auto r = align_phases(cs, abc, {1e-6, PhaseModulus::two_pi});
    CHECK_FALSE(r.feasible());
  }
  SUBCASE("triangle with a quarter-turn defect") {
    const std::vector<PhaseConstraint> cs{{"a", "b", 1.0}, {"b", "c", 1.0}, {"a", "c", I}};
    const auto r = align_phases(cs, abc);
    REQUIRE_FALSE(r.feasible());
    REQUIRE(r.obstruction);
    CHECK(r.obstruction->cycle.size() == 3);
    CHECK(std::abs(std::abs(r.obstruction->defect) - pi / 2.0) < 1e-12);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(align_phases({{"a", "z", 1.0}}, abc), PreconditionError);
    CHECK_THROWS_AS(align_phases({{"a", "b", 0.0}}, abc), PreconditionError);
  }
}

TEST_CASE("obstruction cycle is a closed chain with the reported defect") {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> labels;
    const auto cs = grid_instance(rng, 5, 12, labels);
    const auto r = align_phases(cs, labels);
    if (r.feasible()) continue;
    ++checked;
    // Walk the cycle: every constraint contributes arg(v) oriented along the walk.
    const auto& cycle = r.obstruction->cycle;
    const auto& closing = cycle.back();
    std::string at = closing.left;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cycle.size(); ++i) {
      const auto& c = cycle[i];
      if (c.left == at) {
        total += std::arg(c.value);
        at = c.right;
      } else {
        REQUIRE(c.right == at);
        total -= std::arg(c.value);
        at = c.left;
      }
    }
    CHECK(at == closing.right);
    total -= std::arg(closing.value);
    const double reduced = std::remainder(total, pi);
    CHECK(std::abs(std::abs(reduced) - std::abs(r.obstruction->defect)) < 1e-9);
    CHECK(std::abs(r.obstruction->defect) > 1e-6);
    const auto defect = cycle_defect(cycle);
    REQUIRE(defect);
    CHECK(std::abs(std::abs(*defect) - std::abs(r.obstruction->defect)) < 1e-9);
  }
  CHECK(checked > 20);
}

TEST_CASE("cycle_defect rejects open chains") {
  CHECK_FALSE(cycle_defect({}));
  CHECK_FALSE(cycle_defect({{"a", "b", 1.0}, {"b", "c", 1.0}}));
  const auto d = cycle_defect({{"a", "b", 1.0}, {"b", "c", 1.0}, {"a", "c", I}});
  REQUIRE(d);
  CHECK(std::abs(std::abs(*d) - pi / 2.0) < 1e-12);
  CHECK(*cycle_defect({{"a", "b", -1.0}, {"a", "b", 1.0}}) == doctest::Approx(0.0));
}

TEST_CASE("oracle_align") {
  SUBCASE("two labels") {
    const std::vector<PhaseConstraint> cs{{"a", "b", std::polar(0.5, pi / 3.0)}};
    const auto r = oracle_align(cs, {"a", "b"}, 360);
    CHECK(r.max_residual <= std::sin(pi / 360.0));
  }
  SUBCASE("triangle defect spreads over three edges") {
    const std::vector<PhaseConstraint> cs{{"a", "b", 1.0}, {"b", "c", 1.0}, {"a", "c", I}};
    const auto r = oracle_align(cs, abc, 360);
    CHECK(r.max_residual == doctest::Approx(std::sin(pi / 6.0)).epsilon(1e-9));
  }
  SUBCASE("label limit") {
    CHECK_THROWS_AS(oracle_align({}, {"a", "b", "c", "d", "e", "f"}, 4), PreconditionError);
  }
}

TEST_CASE("align_phases agrees with the oracle on grid instances") {
  std::mt19937_64 rng(11);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> labels;
    const auto cs = grid_instance(rng, 2 + trial % 4, 12, labels);
    const auto r = align_phases(cs, labels);
    const auto o = oracle_align(cs, labels, 12);
    const bool oracle_feasible = o.max_residual < 1e-9;
    CHECK(r.feasible() == oracle_feasible);
    if (r.feasible()) {
      ++feasible;
      CHECK(max_normalized_residual(cs, *r.versions) <= 1e-9);
    } else {
      ++infeasible;
    }
  }
  CHECK(feasible > 20);
  CHECK(infeasible > 20);
}

TEST_CASE("feasibility is gauge and sign invariant") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
  std::bernoulli_distribution flip(0.5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> labels;
    const auto cs = grid_instance(rng, 4, 8, labels);
    std::map<std::string, Complex> gauge;
    for (const auto& l : labels) gauge[l] = std::polar(1.0, angle(rng));
    std::vector<PhaseConstraint> moved;
    for (const auto& c : cs)
      moved.push_back({c.left, c.right,
                       c.value * std::conj(gauge[c.left]) * gauge[c.right] * (flip(rng) ? -1.0 : 1.0)});
    const auto r0 = align_phases(cs, labels);
    const auto r1 = align_phases(moved, labels);
    CHECK(r0.feasible() == r1.feasible());
    if (r1.feasible()) CHECK(max_normalized_residual(moved, *r1.versions) <= 1e-9);
  }
}

TEST_CASE("polish_phases finds off-grid solutions") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
  for (int trial = 0; trial < 50; ++trial) {
    // Planted solution: v_ab = r · conj(c_a) c_b.
    std::vector<Complex> c;
    for (int i = 0; i < 4; ++i) c.push_back(std::polar(1.0, angle(rng)));
    const std::vector<std::string> labels{"a", "b", "c", "d"};
    std::vector<PhaseConstraint> cs;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        cs.push_back({labels[i], labels[j], (j % 2 ? 1.0 : -0.5) * std::conj(c[i]) * c[j]});
    const auto coarse = oracle_align(cs, labels, 36);
    CHECK(coarse.max_residual <= std::sin(pi / 18.0) * 2.0);
    const auto fine = polish_phases(cs, labels, coarse.versions);
    CHECK(fine.max_residual <= 1e-10);
  }
}
