#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "respfit/data.hpp"
#include "respfit/dde.hpp"
#include "respfit/model.hpp"

namespace respfit {

/// The unknowns (alpha, beta). Everything else in ModelParams is fixed.
struct ParameterPair {
  double alpha = 0.0;
  double beta = 0.0;

  friend bool operator==(const ParameterPair &, const ParameterPair &) = default;
};

/// Least-squares fit of (alpha, beta) to a dataset. `model` supplies tau and
/// the ventilation constants; its alpha and beta are overwritten per
/// evaluation.
struct ResidualProblem {
  Dataset dataset;
  ModelParams model;
  HistoryFunction history;
  SolveGrid grid;

  double fixed_tau() const noexcept { return model.tau; }
  std::size_t residual_size() const noexcept { return 2 * dataset.size(); }
};

/// [x(t_i; p) - X_i]_i followed by [y(t_i; p) - Y_i]_i. Propagates NonFinite.
std::vector<double> residuals(const ResidualProblem &problem,
                              const ParameterPair &p);

double sum_of_squares(const std::vector<double> &r);

/// J(alpha, beta), the sum of squared residuals.
double objective(const ResidualProblem &problem, const ParameterPair &p);

/// Forward-difference Jacobian, one column per parameter.
struct Jacobian {
  std::vector<double> d_alpha;
  std::vector<double> d_beta;
  /// Residual evaluations spent: 2, plus 1 when the base point was computed.
  int evaluations = 0;
};

/// Forward step for parameter value v: sqrt(machine eps) * max(|v|, 1).
double forward_step(double v);

Jacobian fd_jacobian(const ResidualProblem &problem, const ParameterPair &p);
Jacobian fd_jacobian(const ResidualProblem &problem, const ParameterPair &p,
                     const std::vector<double> &base_residual);

/// 2 J^T r, the gradient of the sum of squares.
ParameterPair gradient(const Jacobian &jac, const std::vector<double> &r);

enum class Algorithm { LevenbergMarquardt, TrustRegion };
enum class Termination {
  StepTolerance,
  FunctionTolerance,
  GradientTolerance,
  MaxIterations
};

std::string_view to_string(Algorithm a);
std::string_view to_string(Termination t);

struct SolverOptions {
  double step_tol = 1e-6;
  double fun_tol = 1e-6;
  double grad_tol = 1e-10;
  int max_iter = 100;
  /// Hard cap on residual evaluations, rejected trials included.
  int max_evaluations = 2000;

  double lambda0 = 0.01;
  double lambda_factor = 10.0;
  double lambda_singular_limit = 1e10;

  double radius0 = 1.0;
  double radius_max = 100.0;
  double accept_ratio = 1e-4;
  double shrink_ratio = 0.25;
  double expand_ratio = 0.75;
};

/// One row of a convergence table.
struct IterationRecord {
  int iteration = 0;
  int function_count = 0;
  double residual = 0.0;
  double first_order_optimality = 0.0;
  std::optional<double> lambda;
  std::optional<double> step_norm;
  std::optional<double> trust_radius;
};

struct FitResult {
  Algorithm algorithm = Algorithm::LevenbergMarquardt;
  ParameterPair best_fit;
  double final_residual = 0.0;
  Termination termination = Termination::MaxIterations;
  std::vector<IterationRecord> trace;
  /// Includes rejected trials.
  int function_count = 0;
  int rejected_steps = 0;
  std::vector<double> final_residuals;

  int iterations() const noexcept {
    return trace.empty() ? 0 : trace.back().iteration;
  }
};

/**
 * Levenberg-Marquardt with Marquardt scaling:
 *   (J^T J + lambda diag(J^T J)) dp = -J^T r.
 * A decrease is accepted and divides lambda by 10; otherwise lambda is
 * multiplied by 10 and the step retried without a trace row. Stops on the
 * relative step ||dp|| / max(||p||, 1) < step_tol, the gradient infinity
 * norm < grad_tol, or max_iter accepted steps.
 *
 * Trial points whose trajectory overflows count as rejected steps.
 * Throws SingularNormalEquations when the damped system stays singular up to
 * lambda_singular_limit.
 */
FitResult solve_lm(const ResidualProblem &problem, const ParameterPair &p0,
                   const SolverOptions &opts = {});

/**
 * Trust-region Gauss-Newton with a dogleg subproblem.
 *
 * ratio = actual / predicted reduction of the sum of squares; accepted when
 * above accept_ratio. The radius shrinks by 4 below shrink_ratio and doubles
 * (capped by radius_max) above expand_ratio when the step reached the
 * boundary. Stops on |f_k - f_k+1| / max(f_k, 1) < fun_tol, the relative
 * step, the gradient norm, or max_iter.
 */
FitResult solve_trust_region(const ResidualProblem &problem,
                             const ParameterPair &p0,
                             const SolverOptions &opts = {});

/// LM: iter,fcount,residual,first_order_opt,lambda,step_norm
/// TR: iter,fcount,residual,step_norm,first_order_opt,trust_radius
void write_trace_csv(std::ostream &out, const FitResult &fit);
void write_trace_csv(const std::string &path, const FitResult &fit);

} // namespace respfit
