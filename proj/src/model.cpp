#include "respfit/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "respfit/errors.hpp"

namespace respfit {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require(bool ok, const char *what) {
  if (!ok)
    throw std::invalid_argument(std::string("ModelParams: ") + what);
}

} // namespace

void ModelParams::validate_structure() const {
  require(std::isfinite(alpha) && std::isfinite(beta),
          "alpha and beta must be finite");
  require(positive_finite(tau), "tau must be positive");
  require(positive_finite(vent_gain), "vent_gain must be positive");
  require(positive_finite(vent_rate), "vent_rate must be positive");
  require(std::isfinite(vent_offset), "vent_offset must be finite");
}

void ModelParams::validate() const {
  validate_structure();
  require(alpha > 0.0, "alpha must be positive");
  require(beta > 0.0, "beta must be positive");
}

double ventilation(double x_delayed, double y_delayed,
                   const ModelParams &params) {
  return params.vent_gain *
         std::exp(-params.vent_rate * (params.vent_offset - y_delayed)) *
         x_delayed;
}

State rhs(const State &current, const State &delayed,
          const ModelParams &params) {
  const double v = ventilation(delayed.x, delayed.y, params);
  return {1.0 - params.alpha * v * current.x,
          1.0 - params.beta * v * current.y};
}

EquilibriumPoint equilibrium_solve(const ModelParams &params,
                                   const EquilibriumOptions &opts) {
  params.validate();
  if (!(opts.bracket_lo > 0.0 && opts.bracket_hi > opts.bracket_lo))
    throw std::invalid_argument("equilibrium bracket must satisfy 0 < lo < hi");

  const double ratio = params.alpha / params.beta;
  const double scale = params.vent_gain * params.alpha;
  // g(x) = alpha V(x, ratio x) x - 1, strictly increasing on x > 0.
  auto g = [&](double x) {
    return scale *
               std::exp(-params.vent_rate * (params.vent_offset - ratio * x)) *
               x * x -
           1.0;
  };
  auto dg = [&](double x) {
    const double e =
        std::exp(-params.vent_rate * (params.vent_offset - ratio * x));
    return scale * e * (params.vent_rate * ratio * x * x + 2.0 * x);
  };

  double lo = opts.bracket_lo;
  double hi = opts.bracket_hi;
  double g_lo = g(lo);
  double g_hi = g(hi);
  if (!(std::isfinite(g_lo) && std::isfinite(g_hi)) || g_lo * g_hi > 0.0)
    throw NoRoot("equilibrium: no sign change on [" + std::to_string(lo) +
                 ", " + std::to_string(hi) + "]");

  // Bisection down to a narrow bracket.
  for (int i = 0; i < 200 && (hi - lo) > 1e-9 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = g(mid);
    if (g_mid == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((g_mid < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }

  // Newton polish, kept inside the bracket.
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 20; ++i) {
    const double gx = g(x);
    if (std::abs(gx) <= opts.tolerance * 1e-3)
      break;
    const double next = x - gx / dg(x);
    if (!(next >= lo && next <= hi))
      break;
    if (next == x)
      break;
    x = next;
  }

  if (std::abs(g(x)) > opts.tolerance)
    throw NoRoot("equilibrium: polish did not reach tolerance");

  EquilibriumPoint eq;
  eq.x_star = x;
  eq.y_star = ratio * x;
  const double v = ventilation(eq.x_star, eq.y_star, params);
  eq.residual_norm = std::max(std::abs(1.0 - params.alpha * v * eq.x_star),
                              std::abs(1.0 - params.beta * v * eq.y_star));
  return eq;
}

} // namespace respfit
