#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "field_helpers.hpp"
#include "mrelax/woltjer.hpp"

using namespace mrelax;
using namespace mrelax::testing;

TEST_CASE("ABC field is a pure plus-helicity field") {
  Grid3 g(32);
  VectorField B = abc_field(g, 1.0, 1.0, 1.0);
  HelicalParts parts = helical_decompose(B);
  CHECK(l2_norm(parts.minus) < 1e-12 * l2_norm(B));
  CHECK(rel_err(parts.plus, B) < 1e-12);
}

TEST_CASE("(cos z, sin z, 0) is a pure minus-helicity field") {
  Grid3 g(32);
  VectorField B = helical_minus(g);
  HelicalParts parts = helical_decompose(B);
  CHECK(l2_norm(parts.plus) < 1e-12 * l2_norm(B));
}

TEST_CASE("helical decomposition reconstructs and splits energy") {
  Grid3 g(32);
  VectorField B = random_solenoidal(g, 31);
  HelicalParts parts = helical_decompose(B);
  CHECK(rel_err(parts.plus + parts.minus, B) < 1e-12);
  double e = energy(B), ep = energy(parts.plus), em = energy(parts.minus);
  CHECK(std::abs(e - ep - em) < 1e-12 * e);
  CHECK(std::abs(helical_helicity(B) - helicity(B)) < 1e-10 * std::max(1.0, e));
}

TEST_CASE("woltjer minimizer closed form") {
  Grid3 g(32);
  SUBCASE("zero helicity gives the zero field") {
    WoltjerSolution s = woltjer_minimizer(0.0, g);
    CHECK(s.E == 0.0);
    CHECK(l2_norm(s.field) == 0.0);
  }
  SUBCASE("unit helicity at L = 2pi") {
    WoltjerSolution s = woltjer_minimizer(1.0, g);
    CHECK(s.lambda == 1.0);
    CHECK(std::abs(energy(s.field) - 1.0) < 1e-10);
    CHECK(std::abs(helicity(s.field) - 1.0) < 1e-10);
    VectorField r = curl(s.field) - s.lambda * s.field;
    CHECK(l2_norm(r) < 1e-10 * l2_norm(s.field));
  }
  SUBCASE("negative helicity mirrors the positive case") {
    WoltjerSolution s = woltjer_minimizer(-1.0, g);
    CHECK(s.lambda == -1.0);
    CHECK(std::abs(energy(s.field) - 1.0) < 1e-10);
    CHECK(std::abs(helicity(s.field) + 1.0) < 1e-10);
    VectorField r = curl(s.field) - s.lambda * s.field;
    CHECK(l2_norm(r) < 1e-10 * l2_norm(s.field));
  }
  SUBCASE("scaling: E = lambda1 |c|") {
    Grid3 g2(32, 4.0);
    WoltjerSolution s = woltjer_minimizer(3.0, g2);
    CHECK(std::abs(energy(s.field) - (two_pi / 4.0) * 3.0) < 1e-9);
    CHECK(std::abs(helicity(s.field) - 3.0) < 1e-9);
  }
}

TEST_CASE("descent leaves the minimizer fixed") {
  Grid3 g(32);
  WoltjerSolution s = woltjer_minimizer(1.0, g);
  DescentResult r = constrained_descent(s.field, 1.0);
  CHECK(r.converged);
  CHECK(rel_err(r.field, s.field) < 1e-10);
}

TEST_CASE("descent from a mixed-mode start reaches the closed-form minimum") {
  Grid3 g(32);
  // mixture of the lambda = +-1 shell and an |k| = 2 mode, rescaled to H = 1
  WoltjerSolution plus = woltjer_minimizer(1.0, g);
  VectorField B = plus.field;
  VectorField minus = helical_minus(g);
  VectorField k2 = sample(g, [](double x, double, double) { return Vec3{0, std::sin(2 * x), std::cos(2 * x)}; });
  minus *= 0.5 / l2_norm(minus);
  k2 *= 0.4 / l2_norm(k2);
  B += minus;
  B += k2;
  double H0 = helicity(B);
  REQUIRE(H0 > 0);
  B *= 1.0 / std::sqrt(H0);  // helicity scales quadratically
  CHECK(std::abs(helicity(B) - 1.0) < 1e-10);
  DescentResult r = constrained_descent(B, 1.0);
  CHECK(r.converged);
  CHECK(std::abs(r.E - 1.0) < 1e-6);
  CHECK(std::abs(helicity(r.field) - 1.0) < 1e-8);
  CHECK(r.beltrami_residual < 1e-6);
}

TEST_CASE("zero-helicity descent sends the energy to zero") {
  Grid3 g(32);
  VectorField minus = helical_minus(g);
  minus *= 1.0 / l2_norm(minus);  // lambda = -1 eigenfield with E = 1, H = -1
  VectorField B = woltjer_minimizer(1.0, g).field + minus;
  double H0 = helicity(B);
  REQUIRE(std::abs(H0) < 1e-10);
  DescentResult r = constrained_descent(B, 0.0);
  CHECK(r.converged);
  CHECK(r.E <= 1e-8);
}

TEST_CASE("descent rejects a mismatched constraint") {
  Grid3 g(32);
  VectorField B = woltjer_minimizer(1.0, g).field;
  CHECK_THROWS_AS(constrained_descent(B, 2.0), std::invalid_argument);
}

TEST_CASE("descent is monotone and conserves helicity per step") {
  Grid3 g(32);
  VectorField B = random_solenoidal(g, 77);
  double c = helicity(B);
  DescentOptions opts;
  opts.max_steps = 50;  // stop early to observe a partial run
  DescentResult r = constrained_descent(B, c, opts);
  CHECK(r.E <= energy(B) + 1e-10 * energy(B));
  CHECK(std::abs(helicity(r.field) - c) < 1e-8 * std::max(1.0, std::abs(c)) * (r.steps + 1));
}

TEST_CASE("optimality certificate: random fields never beat the minimizer") {
  Grid3 g(32);
  for (unsigned seed = 1; seed <= 100; ++seed) {
    VectorField B = random_solenoidal(g, seed);
    double c = helicity(B);
    CHECK(energy(B) >= energy(woltjer_minimizer(c, g).field) - 1e-10);
  }
}
