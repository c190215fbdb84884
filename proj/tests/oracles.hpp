#pragma once

// Independent reference computations for the tests. Nothing here calls the
// code paths it is used to check.

#include <cmath>
#include <functional>
#include <vector>

#include "respfit/data.hpp"
#include "respfit/model.hpp"

namespace oracle {

/// Plain bisection on alpha V(x, (alpha/beta) x) x - 1 with V written out
/// from the model formula.
inline respfit::State equilibrium_by_bisection(double alpha, double beta,
                                               double gain = 0.14,
                                               double rate = 0.05,
                                               double offset = 100.0) {
  auto g = [&](double x) {
    const double y = alpha / beta * x;
    return alpha * gain * std::exp(-rate * (offset - y)) * x * x - 1.0;
  };
  double lo = 1e-6, hi = 1e3;
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  const double x = 0.5 * (lo + hi);
  return {x, alpha / beta * x};
}

/// On [t0, t0 + tau] with constant history (x0, y0) the delayed term is
/// constant, so x' = 1 - a x with a = alpha V(x0, y0). Exact solution.
inline double first_interval_x(double alpha, double x0, double y0, double t,
                               double gain = 0.14, double rate = 0.05,
                               double offset = 100.0) {
  const double a = alpha * gain * std::exp(-rate * (offset - y0)) * x0;
  return 1.0 / a + (x0 - 1.0 / a) * std::exp(-a * t);
}

/// Objective written as the two explicit sums over measurements.
inline double objective_double_sum(const respfit::Dataset &data,
                                   const std::function<respfit::State(double)>
                                       &model) {
  double sx = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double d = model(data.times[i]).x - data.x_obs[i];
    sx += d * d;
  }
  double sy = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double d = model(data.times[i]).y - data.y_obs[i];
    sy += d * d;
  }
  return sx + sy;
}

/// Central difference of a vector function in one scalar argument.
inline std::vector<double>
central_difference(const std::function<std::vector<double>(double)> &f,
                   double v, double h) {
  const std::vector<double> plus = f(v + h);
  const std::vector<double> minus = f(v - h);
  std::vector<double> d(plus.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = (plus[i] - minus[i]) / (2.0 * h);
  return d;
}

/// Small deterministic generator for property tests (splitmix64).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

private:
  std::uint64_t state_;
};

} // namespace oracle
