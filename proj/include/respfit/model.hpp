#pragma once

/**
 * @file model.hpp
 * @brief Two-state delayed CO2/O2 balance model with ventilation feedback.
 *
 *   x'(t) = 1 - alpha * V(x(t-tau), y(t-tau)) * x(t)
 *   y'(t) = 1 - beta  * V(x(t-tau), y(t-tau)) * y(t)
 *   V(xd, yd) = vent_gain * exp(-vent_rate * (vent_offset - yd)) * xd
 */

namespace respfit {

struct ModelParams {
  double alpha = 0.5;
  double beta = 0.8;
  double tau = 1.0;
  double vent_gain = 0.14;
  double vent_rate = 0.05;
  double vent_offset = 100.0;

  /// Throws std::invalid_argument unless alpha, beta, tau, vent_gain and
  /// vent_rate are all positive and finite.
  void validate() const;

  /// Same check minus the sign of alpha and beta. Fitting is unconstrained,
  /// so trial points may leave the physical region.
  void validate_structure() const;
};

struct State {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const State &, const State &) = default;
};

struct EquilibriumPoint {
  double x_star = 0.0;
  double y_star = 0.0;
  /// max of |1 - alpha V x*| and |1 - beta V y*|.
  double residual_norm = 0.0;
};

double ventilation(double x_delayed, double y_delayed,
                   const ModelParams &params);

/// Derivative of the state given its current and delayed values.
State rhs(const State &current, const State &delayed,
          const ModelParams &params);

struct EquilibriumOptions {
  double bracket_lo = 1e-6;
  double bracket_hi = 1e3;
  double tolerance = 1e-12;
};

/// Constant solution of the model. The two balance equations give
/// y* = (alpha/beta) x*, leaving one increasing scalar equation in x* that is
/// bracketed by bisection and then polished with Newton.
/// Throws NoRoot when the bracket holds no sign change.
EquilibriumPoint equilibrium_solve(const ModelParams &params,
                                   const EquilibriumOptions &opts = {});

} // namespace respfit
