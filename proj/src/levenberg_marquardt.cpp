#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "respfit/errors.hpp"
#include "respfit/nlls.hpp"
#include "solver_detail.hpp"

namespace respfit {

using detail::Sym2;
using detail::Vec2;

FitResult solve_lm(const ResidualProblem &problem, const ParameterPair &p0,
                   const SolverOptions &opts) {
  if (!std::isfinite(p0.alpha) || !std::isfinite(p0.beta))
    throw std::invalid_argument("solve_lm: initial point must be finite");

  FitResult fit;
  fit.algorithm = Algorithm::LevenbergMarquardt;

  ParameterPair p = p0;
  std::vector<double> r = residuals(problem, p);
  Jacobian jac = fd_jacobian(problem, p, r);
  int fcount = 1 + jac.evaluations;
  double f = sum_of_squares(r);
  Vec2 g = detail::project(jac, r);
  double lambda = opts.lambda0;

  auto record = [&](int iter, std::optional<double> step) {
    IterationRecord rec;
    rec.iteration = iter;
    rec.function_count = fcount;
    rec.residual = f;
    rec.first_order_optimality = 2.0 * detail::norm_inf(g);
    rec.lambda = lambda;
    rec.step_norm = step;
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
    const Sym2 damped{normal.aa * (1.0 + lambda), normal.ab,
                      normal.bb * (1.0 + lambda)};
    const std::optional<Vec2> solved = detail::solve(damped, {-g.a, -g.b});
    if (!solved) {
      if (lambda >= opts.lambda_singular_limit)
        throw SingularNormalEquations(
            "damped normal equations singular at lambda=" +
            std::to_string(lambda));
      lambda *= opts.lambda_factor;
      continue;
    }
    const Vec2 step = *solved;
    const ParameterPair trial = p + step;

    std::optional<std::vector<double>> r_trial =
        detail::try_residuals(problem, trial);
    ++fcount;
    const double f_trial = r_trial ? sum_of_squares(*r_trial)
                                   : std::numeric_limits<double>::infinity();

    if (f_trial < f) {
      p = trial;
      r = std::move(*r_trial);
      f = f_trial;
      lambda /= opts.lambda_factor;
      jac = fd_jacobian(problem, p, r);
      fcount += jac.evaluations;
      g = detail::project(jac, r);
      ++iter;
      record(iter, detail::norm(step));

      if (detail::relative_step(step, p) < opts.step_tol)
        return finish(Termination::StepTolerance);
      if (2.0 * detail::norm_inf(g) < opts.grad_tol)
        return finish(Termination::GradientTolerance);
    } else {
      ++fit.rejected_steps;
      if (detail::relative_step(step, p) < opts.step_tol)
        return finish(Termination::StepTolerance);
      lambda *= opts.lambda_factor;
    }
  }
}

} // namespace respfit
