#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "respfit/dde.hpp"
#include "respfit/errors.hpp"

using namespace respfit;

namespace {

double first_interval_error(int steps_per_delay) {
  const ModelParams p;
  const Trajectory traj =
      solve_dde(p, HistoryFunction::constant({35.0, 35.0}), 0.0, 1.0,
                steps_per_delay);
  return std::abs(traj.eval(1.0).x - oracle::first_interval_x(0.5, 35.0, 35.0, 1.0));
}

} // namespace

TEST_SUITE("dde_solver") {

TEST_CASE("constant equilibrium history stays at the equilibrium") {
  const ModelParams p;
  const EquilibriumPoint eq = equilibrium_solve(p);
  const Trajectory traj =
      solve_dde(p, HistoryFunction::constant({eq.x_star, eq.y_star}), 0.0, 10.0);
  for (const State &s : traj.states()) {
    CHECK(std::abs(s.x - eq.x_star) <= 1e-9);
    CHECK(std::abs(s.y - eq.y_star) <= 1e-9);
  }
  const State mid = traj.eval(3.0 + 0.5 * traj.step());
  CHECK(std::abs(mid.x - eq.x_star) <= 1e-9);
  CHECK(std::abs(mid.y - eq.y_star) <= 1e-9);
}

TEST_CASE("first delay interval matches the linear ODE solution") {
  const double exact = oracle::first_interval_x(0.5, 35.0, 35.0, 1.0);
  CHECK(exact == doctest::Approx(32.78).epsilon(1e-4));
  CHECK(first_interval_error(kDefaultStepsPerDelay) <= 1e-9);

  // y obeys the same linear ODE with beta in place of alpha.
  const ModelParams p;
  const Trajectory traj =
      solve_dde(p, HistoryFunction::constant({35.0, 35.0}), 0.0, 1.0);
  const double a = 0.8 * ventilation(35.0, 35.0, p);
  const double y_exact = 1.0 / a + (35.0 - 1.0 / a) * std::exp(-a);
  CHECK(traj.eval(1.0).y == doctest::Approx(y_exact).epsilon(1e-10));
}

TEST_CASE("fourth order convergence on the first interval") {
  const double e10 = first_interval_error(10);
  const double e20 = first_interval_error(20);
  const double e40 = first_interval_error(40);
  CHECK(e10 / e20 >= 12.0);
  CHECK(e20 / e40 >= 12.0);
  CHECK(std::log2(e10 / e40) / 2.0 >= 3.5);
}

TEST_CASE("alpha = beta with x = y history keeps x = y") {
  ModelParams p;
  p.beta = p.alpha;
  const Trajectory traj =
      solve_dde(p, HistoryFunction::constant({40.0, 40.0}), 0.0, 5.0);
  for (const State &s : traj.states())
    CHECK(std::abs(s.x - s.y) <= 1e-12);
}

TEST_CASE("trajectory evaluation") {
  const ModelParams p;
  const Trajectory traj =
      solve_dde(p, HistoryFunction::constant({35.0, 35.0}), 0.0, 5.0);

  SUBCASE("node lookup is exact") {
    for (std::size_t k : {std::size_t{0}, std::size_t{7}, std::size_t{133},
                          traj.size() - 1}) {
      const State s = traj.eval(traj.node_time(k));
      CHECK(s == traj.node(k));
    }
  }
  SUBCASE("history region") {
    CHECK(traj.eval(-0.5) == State{35.0, 35.0});
    CHECK(traj.eval(-1.0) == State{35.0, 35.0});
  }
  SUBCASE("out of domain") {
    CHECK_THROWS_AS(traj.eval(-1.01), OutOfDomain);
    CHECK_THROWS_AS(traj.eval(5.01), OutOfDomain);
  }
  SUBCASE("continuity") {
    oracle::Rng rng(3);
    for (int i = 0; i < 500; ++i) {
      const double t = rng.uniform(-1.0, 5.0 - 1e-11);
      const State a = traj.eval(t);
      const State b = traj.eval(t + 1e-12);
      CHECK(std::abs(a.x - b.x) <= 1e-8);
      CHECK(std::abs(a.y - b.y) <= 1e-8);
    }
    for (std::size_t k = 0; k + 1 < traj.size(); k += 17) {
      const double t = traj.node_time(k);
      const State a = traj.eval(t);
      const State b = traj.eval(t + 1e-12);
      CHECK(std::abs(a.x - b.x) <= 1e-8);
    }
  }
}

TEST_CASE("delayed full-step samples land on grid nodes") {
  const ModelParams p;
  const int lag = 20;
  const Trajectory traj =
      solve_dde(p, HistoryFunction::constant({35.0, 35.0}), 0.0, 5.0, lag);
  const DelayLookupStats &stats = traj.lookup_stats();
  const std::size_t steps = traj.size() - 1;
  CHECK(stats.off_grid_full == 0);
  // Half-step samples interpolate once the delayed point passes t0.
  CHECK(stats.hermite == steps - lag);
  CHECK(stats.grid_node + stats.history + stats.hermite == 2 * steps + 1);
}

TEST_CASE("repeated solves are bit-identical") {
  ModelParams p;
  p.alpha = 0.37;
  p.beta = 0.91;
  const auto h = HistoryFunction::constant({33.0, 21.0});
  const Trajectory a = solve_dde(p, h, 0.0, 5.0);
  const Trajectory b = solve_dde(p, h, 0.0, 5.0);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k)
    CHECK(a.node(k) == b.node(k));
}

TEST_CASE("tabulated history") {
  const ModelParams p;
  std::vector<double> times;
  std::vector<State> states;
  for (int i = 0; i <= 10; ++i) {
    const double t = -1.0 + 0.1 * i;
    times.push_back(t);
    states.push_back({30.0 + t, 20.0 - t});
  }
  const auto hist = HistoryFunction::tabulated(times, states);
  const State mid = hist.eval(-0.55);
  CHECK(mid.x == doctest::Approx(29.45));
  CHECK(mid.y == doctest::Approx(20.55));

  const Trajectory traj = solve_dde(p, hist, 0.0, 2.0);
  CHECK(traj.eval(-0.25).x == doctest::Approx(29.75));
  CHECK(traj.node(0) == hist.eval(0.0));

  // does not reach back to t0 - tau
  const auto short_hist = HistoryFunction::tabulated({-0.5, 0.0},
                                                     {{30, 20}, {30, 20}});
  CHECK_THROWS_AS(solve_dde(p, short_hist, 0.0, 2.0), OutOfDomain);
  CHECK_THROWS_AS(HistoryFunction::tabulated({0.0, 0.0}, {{1, 1}, {1, 1}}),
                  std::invalid_argument);
}

TEST_CASE("grid and overflow errors") {
  const ModelParams p;
  const auto h = HistoryFunction::constant({35.0, 35.0});
  CHECK_THROWS_AS(solve_dde(p, h, 0.0, 5.01), InvalidGrid);
  CHECK_THROWS_AS(solve_dde(p, h, 0.0, 5.0, 1), InvalidGrid);
  CHECK_THROWS_AS(solve_dde(p, h, 5.0, 5.0), InvalidGrid);

  ModelParams wild = p;
  wild.alpha = -3.0;
  wild.beta = -3.0;
  CHECK_THROWS_AS(solve_dde(wild, h, 0.0, 20.0), NonFinite);
}

TEST_CASE("trajectory CSV export") {
  const ModelParams p;
  const Trajectory traj =
      solve_dde(p, HistoryFunction::constant({35.0, 35.0}), 0.0, 1.0, 4);
  std::ostringstream out;
  write_trajectory_csv(out, traj);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x,y");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const double t = std::strtod(line.substr(0, c1).c_str(), nullptr);
    const double x = std::strtod(line.substr(c1 + 1, c2 - c1 - 1).c_str(), nullptr);
    const double y = std::strtod(line.substr(c2 + 1).c_str(), nullptr);
    CHECK(t == traj.node_time(rows));
    CHECK(x == traj.node(rows).x);
    CHECK(y == traj.node(rows).y);
    ++rows;
  }
  CHECK(rows == traj.size());
}

}
