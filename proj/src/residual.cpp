#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "respfit/errors.hpp"
#include "respfit/nlls.hpp"
#include "solver_detail.hpp"

namespace respfit {

std::vector<double> residuals(const ResidualProblem &problem,
                              const ParameterPair &p) {
  ModelParams params = problem.model;
  params.alpha = p.alpha;
  params.beta = p.beta;
  const Trajectory traj =
      solve_dde(params, problem.history, problem.grid.t0, problem.grid.t_end,
                problem.grid.steps_per_delay);

  const Dataset &data = problem.dataset;
  const std::size_t m = data.size();
  std::vector<double> r(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    const State s = traj.eval(data.times[i]);
    r[i] = s.x - data.x_obs[i];
    r[m + i] = s.y - data.y_obs[i];
  }
  return r;
}

double sum_of_squares(const std::vector<double> &r) {
  double acc = 0.0;
  for (double v : r)
    acc += v * v;
  return acc;
}

double objective(const ResidualProblem &problem, const ParameterPair &p) {
  return sum_of_squares(residuals(problem, p));
}

double forward_step(double v) {
  static const double root_eps =
      std::sqrt(std::numeric_limits<double>::epsilon());
  return root_eps * std::max(std::abs(v), 1.0);
}

Jacobian fd_jacobian(const ResidualProblem &problem, const ParameterPair &p,
                     const std::vector<double> &base_residual) {
  const double da = forward_step(p.alpha);
  const double db = forward_step(p.beta);
  // Difference against the representable perturbed value, not the nominal step.
  const ParameterPair pa{p.alpha + da, p.beta};
  const ParameterPair pb{p.alpha, p.beta + db};
  const double ha = pa.alpha - p.alpha;
  const double hb = pb.beta - p.beta;

  Jacobian jac;
  jac.d_alpha = residuals(problem, pa);
  jac.d_beta = residuals(problem, pb);
  jac.evaluations = 2;
  for (std::size_t i = 0; i < base_residual.size(); ++i) {
    jac.d_alpha[i] = (jac.d_alpha[i] - base_residual[i]) / ha;
    jac.d_beta[i] = (jac.d_beta[i] - base_residual[i]) / hb;
  }
  return jac;
}

Jacobian fd_jacobian(const ResidualProblem &problem, const ParameterPair &p) {
  Jacobian jac = fd_jacobian(problem, p, residuals(problem, p));
  jac.evaluations += 1;
  return jac;
}

ParameterPair gradient(const Jacobian &jac, const std::vector<double> &r) {
  const detail::Vec2 g = detail::project(jac, r);
  return {2.0 * g.a, 2.0 * g.b};
}

std::string_view to_string(Algorithm a) {
  switch (a) {
  case Algorithm::LevenbergMarquardt:
    return "levenberg-marquardt";
  case Algorithm::TrustRegion:
    return "trust-region";
  }
  return "unknown";
}

std::string_view to_string(Termination t) {
  switch (t) {
  case Termination::StepTolerance:
    return "step-tolerance";
  case Termination::FunctionTolerance:
    return "function-tolerance";
  case Termination::GradientTolerance:
    return "gradient-tolerance";
  case Termination::MaxIterations:
    return "max-iterations";
  }
  return "unknown";
}

namespace {

void put(std::ostream &out, const std::optional<double> &v) {
  if (v)
    out << *v;
}

} // namespace

void write_trace_csv(std::ostream &out, const FitResult &fit) {
  const auto old_precision = out.precision(17);
  if (fit.algorithm == Algorithm::LevenbergMarquardt) {
    out << "iter,fcount,residual,first_order_opt,lambda,step_norm\n";
    for (const IterationRecord &rec : fit.trace) {
      out << rec.iteration << ',' << rec.function_count << ',' << rec.residual
          << ',' << rec.first_order_optimality << ',';
      put(out, rec.lambda);
      out << ',';
      put(out, rec.step_norm);
      out << '\n';
    }
  } else {
    out << "iter,fcount,residual,step_norm,first_order_opt,trust_radius\n";
    for (const IterationRecord &rec : fit.trace) {
      out << rec.iteration << ',' << rec.function_count << ',' << rec.residual
          << ',';
      put(out, rec.step_norm);
      out << ',' << rec.first_order_optimality << ',';
      put(out, rec.trust_radius);
      out << '\n';
    }
  }
  out.precision(old_precision);
}

void write_trace_csv(const std::string &path, const FitResult &fit) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot open " + path + " for writing");
  write_trace_csv(out, fit);
  if (!out)
    throw IoError("failed writing " + path);
}

} // namespace respfit
