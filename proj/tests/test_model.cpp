#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "respfit/errors.hpp"
#include "respfit/model.hpp"

using namespace respfit;

TEST_SUITE("respiratory_model") {

TEST_CASE("ventilation closed-form values") {
  const ModelParams p;
  CHECK(ventilation(0.0, 50.0, p) == 0.0);
  CHECK(ventilation(1.0, 100.0, p) == doctest::Approx(0.14).epsilon(1e-15));

  // At the published equilibrium alpha V x* = 1.
  const double v = ventilation(29.1842, 18.2401, p);
  CHECK(v == doctest::Approx(0.06853).epsilon(5e-5));
  CHECK(v == doctest::Approx(1.0 / (0.5 * 29.1842)).epsilon(5e-5));
}

TEST_CASE("ventilation is monotone and allows y above the offset") {
  const ModelParams p;
  oracle::Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(0.0, 80.0);
    const double y = rng.uniform(0.0, 150.0);
    CHECK(ventilation(x + 0.5, y, p) > ventilation(x, y, p));
    if (x > 0.0)
      CHECK(ventilation(x, y + 0.5, p) > ventilation(x, y, p));
  }
  // positive exponent past vent_offset, no clamping
  CHECK(ventilation(1.0, 120.0, p) ==
        doctest::Approx(0.14 * std::exp(0.05 * 20.0)));
}

TEST_CASE("rhs") {
  ModelParams p;
  SUBCASE("zero current state") {
    const State d = rhs({0.0, 0.0}, {40.0, 20.0}, p);
    CHECK(d.x == 1.0);
    CHECK(d.y == 1.0);
  }
  SUBCASE("vanishes at the equilibrium") {
    const EquilibriumPoint eq = equilibrium_solve(p);
    const State s{eq.x_star, eq.y_star};
    const State d = rhs(s, s, p);
    CHECK(std::abs(d.x) <= 1e-10);
    CHECK(std::abs(d.y) <= 1e-10);
  }
  SUBCASE("symmetric for alpha = beta") {
    p.beta = p.alpha;
    const State d = rhs({31.0, 31.0}, {27.0, 27.0}, p);
    CHECK(d.x == d.y);
  }
}

TEST_CASE("equilibrium for alpha 0.5, beta 0.8 matches the published values") {
  ModelParams p;
  const EquilibriumPoint eq = equilibrium_solve(p);
  CHECK(std::round(eq.x_star * 1e4) / 1e4 == doctest::Approx(29.1842).epsilon(1e-12));
  CHECK(std::round(eq.y_star * 1e4) / 1e4 == doctest::Approx(18.2401).epsilon(1e-12));
  CHECK(std::abs(eq.y_star - 0.625 * eq.x_star) <= 1e-10 * eq.y_star);
  CHECK(eq.residual_norm <= 1e-10);

  const State ref = oracle::equilibrium_by_bisection(0.5, 0.8);
  CHECK(eq.x_star == doctest::Approx(ref.x).epsilon(1e-10));
}

TEST_CASE("swapping alpha and beta does not swap the equilibrium") {
  // V depends on x and y asymmetrically, so (0.8, 0.5) is a different point.
  ModelParams p;
  p.alpha = 0.8;
  p.beta = 0.5;
  const EquilibriumPoint eq = equilibrium_solve(p);
  const State ref = oracle::equilibrium_by_bisection(0.8, 0.5);
  CHECK(eq.x_star == doctest::Approx(ref.x).epsilon(1e-10));
  CHECK(eq.y_star == doctest::Approx(ref.y).epsilon(1e-10));
  CHECK(eq.x_star == doctest::Approx(17.8357).epsilon(1e-5));
  CHECK(eq.y_star == doctest::Approx(28.5371).epsilon(1e-5));
  CHECK(std::abs(eq.x_star - 18.2401) > 0.1);
}

TEST_CASE("equilibrium properties over random parameters") {
  oracle::Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    ModelParams p;
    p.alpha = rng.uniform(0.05, 2.0);
    p.beta = rng.uniform(0.05, 2.0);
    const EquilibriumPoint eq = equilibrium_solve(p);
    const double v = ventilation(eq.x_star, eq.y_star, p);
    CHECK(std::abs(1.0 - p.alpha * v * eq.x_star) <= 1e-10);
    CHECK(std::abs(1.0 - p.beta * v * eq.y_star) <= 1e-10);
    CHECK(std::abs(eq.y_star - p.alpha / p.beta * eq.x_star) <=
          1e-10 * eq.y_star);

    EquilibriumOptions wide;
    wide.bracket_lo = 1e-4;
    wide.bracket_hi = 5e2;
    const EquilibriumPoint other = equilibrium_solve(p, wide);
    CHECK(std::abs(other.x_star - eq.x_star) <= 1e-8);

    p.beta = p.alpha;
    const EquilibriumPoint sym = equilibrium_solve(p);
    CHECK(sym.x_star == sym.y_star);
  }
}

TEST_CASE("equilibrium errors") {
  ModelParams p;
  EquilibriumOptions narrow;
  narrow.bracket_lo = 1e-6;
  narrow.bracket_hi = 1.0; // g < 0 on the whole bracket
  CHECK_THROWS_AS(equilibrium_solve(p, narrow), NoRoot);

  p.alpha = -0.5;
  CHECK_THROWS_AS(equilibrium_solve(p), std::invalid_argument);
}

TEST_CASE("parameter validation") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  p.tau = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.vent_rate = -1.0;
  CHECK_THROWS_AS(p.validate_structure(), std::invalid_argument);
  p = {};
  p.alpha = -0.1;
  CHECK_NOTHROW(p.validate_structure());
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

}
