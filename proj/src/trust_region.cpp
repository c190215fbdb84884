#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "respfit/nlls.hpp"
#include "solver_detail.hpp"

namespace respfit {

using detail::Sym2;
using detail::Vec2;

namespace {

struct DoglegStep {
  Vec2 step;
  bool on_boundary = false;
};

/// Approximate minimizer of g^T s + s^T B s / 2 over ||s|| <= radius.
/// Here g = J^T r and B = J^T J, which is half the sum-of-squares model.
DoglegStep dogleg(const Sym2 &b, const Vec2 &g, double radius) {
  const double g_norm = detail::norm(g);
  if (g_norm == 0.0)
    return {};

  const std::optional<Vec2> newton = detail::solve(b, {-g.a, -g.b});
  if (newton && detail::norm(*newton) <= radius)
    return {*newton, false};

  const double curvature = detail::dot(g, b * g);
  const Vec2 to_boundary{-radius * g.a / g_norm, -radius * g.b / g_norm};
  if (curvature <= 0.0)
    return {to_boundary, true};

  const double t = (g_norm * g_norm) / curvature;
  const Vec2 cauchy{-t * g.a, -t * g.b};
  if (!newton || detail::norm(cauchy) >= radius)
    return {to_boundary, true};

  // ||cauchy + s (newton - cauchy)|| = radius for s in [0, 1].
  const Vec2 d{newton->a - cauchy.a, newton->b - cauchy.b};
  const double qa = detail::dot(d, d);
  const double qb = 2.0 * detail::dot(cauchy, d);
  const double qc = detail::dot(cauchy, cauchy) - radius * radius;
  const double disc = std::max(qb * qb - 4.0 * qa * qc, 0.0);
  const double s = (-qb + std::sqrt(disc)) / (2.0 * qa);
  return {{cauchy.a + s * d.a, cauchy.b + s * d.b}, true};
}

} // namespace

FitResult solve_trust_region(const ResidualProblem &problem,
                             const ParameterPair &p0,
                             const SolverOptions &opts) {
  if (!std::isfinite(p0.alpha) || !std::isfinite(p0.beta))
    throw std::invalid_argument(
        "solve_trust_region: initial point must be finite");

  FitResult fit;
  fit.algorithm = Algorithm::TrustRegion;

  ParameterPair p = p0;
  std::vector<double> r = residuals(problem, p);
  Jacobian jac = fd_jacobian(problem, p, r);
  int fcount = 1 + jac.evaluations;
  double f = sum_of_squares(r);
  Vec2 g = detail::project(jac, r);
  double radius = opts.radius0;

  auto record = [&](int iter, std::optional<double> step) {
    IterationRecord rec;
    rec.iteration = iter;
    rec.function_count = fcount;
    rec.residual = f;
    rec.first_order_optimality = 2.0 * detail::norm_inf(g);
    rec.step_norm = step;
    rec.trust_radius = radius;
    fit.trace.push_back(rec);
  };
  auto finish = [&](Termination why) {
    fit.best_fit = p;
    fit.final_residual = f;
    fit.termination = why;
    fit.function_count = fcount;
    fit.final_residuals = r;
    return fit;
  };

  record(0, std::nullopt);
  if (2.0 * detail::norm_inf(g) < opts.grad_tol)
    return finish(Termination::GradientTolerance);

  int iter = 0;
  while (true) {
    if (iter >= opts.max_iter || fcount >= opts.max_evaluations)
      return finish(Termination::MaxIterations);

    const Sym2 normal = detail::gram(jac);
    const DoglegStep dl = dogleg(normal, g, radius);
    const Vec2 &step = dl.step;
    // ||r + J s||^2 = f + 2 g^T s + s^T B s
    const double predicted =
        -(2.0 * detail::dot(g, step) + detail::dot(step, normal * step));

    const ParameterPair trial = p + step;
    std::optional<std::vector<double>> r_trial =
        detail::try_residuals(problem, trial);
    ++fcount;
    const double f_trial = r_trial ? sum_of_squares(*r_trial)
                                   : std::numeric_limits<double>::infinity();
    const double actual = f - f_trial;
    const double ratio = predicted > 0.0 && std::isfinite(actual)
                             ? actual / predicted
                             : -1.0;

    const double step_norm = detail::norm(step);
    if (ratio < opts.shrink_ratio)
      radius = 0.25 * radius;
    else if (ratio > opts.expand_ratio && dl.on_boundary)
      radius = std::min(2.0 * radius, opts.radius_max);

    if (ratio > opts.accept_ratio) {
      const double f_prev = f;
      p = trial;
      r = std::move(*r_trial);
      f = f_trial;
      jac = fd_jacobian(problem, p, r);
      fcount += jac.evaluations;
      g = detail::project(jac, r);
      ++iter;
      record(iter, step_norm);

      if (std::abs(f_prev - f) / std::max(f_prev, 1.0) < opts.fun_tol)
        return finish(Termination::FunctionTolerance);
      if (detail::relative_step(step, p) < opts.step_tol)
        return finish(Termination::StepTolerance);
      if (2.0 * detail::norm_inf(g) < opts.grad_tol)
        return finish(Termination::GradientTolerance);
    } else {
      ++fit.rejected_steps;
      if (detail::relative_step(step, p) < opts.step_tol)
        return finish(Termination::StepTolerance);
    }
  }
}

} // namespace respfit
