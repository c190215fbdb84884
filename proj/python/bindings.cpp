#include <sstream>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/operators.h>

#include "respfit/data.hpp"
#include "respfit/dde.hpp"
#include "respfit/errors.hpp"
#include "respfit/experiment.hpp"
#include "respfit/model.hpp"
#include "respfit/nlls.hpp"

namespace py = pybind11;
using namespace respfit;

namespace {

std::string repr_state(const State &s) {
  std::ostringstream out;
  out.precision(17);
  out << "State(x=" << s.x << ", y=" << s.y << ")";
  return out.str();
}

std::string repr_pair(const ParameterPair &p) {
  std::ostringstream out;
  out.precision(17);
  out << "ParameterPair(alpha=" << p.alpha << ", beta=" << p.beta << ")";
  return out.str();
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Delayed respiratory model: simulation, synthetic data and "
            "(alpha, beta) least-squares fits.";
  m.attr("__version__") = "0.1.0";

  auto error = py::register_exception<Error>(m, "RespfitError", PyExc_RuntimeError);
  auto solver = py::register_exception<SolverError>(m, "SolverError", error.ptr());
  py::register_exception<NoRoot>(m, "NoRoot", solver.ptr());
  py::register_exception<InvalidGrid>(m, "InvalidGrid", solver.ptr());
  py::register_exception<NonFinite>(m, "NonFinite", solver.ptr());
  py::register_exception<OutOfDomain>(m, "OutOfDomain", solver.ptr());
  py::register_exception<SingularNormalEquations>(m, "SingularNormalEquations",
                                                  solver.ptr());
  py::register_exception<StageError>(m, "StageError", solver.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());

  // model
  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](double alpha, double beta, double tau, double vent_gain,
                       double vent_rate, double vent_offset) {
             return ModelParams{alpha, beta, tau, vent_gain, vent_rate, vent_offset};
           }),
           py::arg("alpha") = 0.5, py::arg("beta") = 0.8, py::arg("tau") = 1.0,
           py::arg("vent_gain") = 0.14, py::arg("vent_rate") = 0.05,
           py::arg("vent_offset") = 100.0)
      .def_readwrite("alpha", &ModelParams::alpha)
      .def_readwrite("beta", &ModelParams::beta)
      .def_readwrite("tau", &ModelParams::tau)
      .def_readwrite("vent_gain", &ModelParams::vent_gain)
      .def_readwrite("vent_rate", &ModelParams::vent_rate)
      .def_readwrite("vent_offset", &ModelParams::vent_offset)
      .def("validate", &ModelParams::validate);

  py::class_<State>(m, "State")
      .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
      .def_readwrite("x", &State::x)
      .def_readwrite("y", &State::y)
      .def(py::self == py::self)
      .def("__iter__", [](const State &s) {
        return py::iter(py::make_tuple(s.x, s.y));
      })
      .def("__repr__", &repr_state);

  py::class_<EquilibriumPoint>(m, "EquilibriumPoint")
      .def_readonly("x_star", &EquilibriumPoint::x_star)
      .def_readonly("y_star", &EquilibriumPoint::y_star)
      .def_readonly("residual_norm", &EquilibriumPoint::residual_norm);

  m.def("ventilation", &ventilation, py::arg("x_delayed"), py::arg("y_delayed"),
        py::arg("params") = ModelParams{});
  m.def("rhs", &rhs, py::arg("current"), py::arg("delayed"),
        py::arg("params") = ModelParams{});
  m.def(
      "equilibrium_solve",
      [](const ModelParams &p, double lo, double hi, double tol) {
        return equilibrium_solve(p, EquilibriumOptions{lo, hi, tol});
      },
      py::arg("params") = ModelParams{}, py::arg("bracket_lo") = 1e-6,
      py::arg("bracket_hi") = 1e3, py::arg("tolerance") = 1e-12);

  // dde
  py::class_<HistoryFunction>(m, "HistoryFunction")
      .def_static("constant", &HistoryFunction::constant, py::arg("value"))
      .def_static("tabulated", &HistoryFunction::tabulated, py::arg("times"),
                  py::arg("states"))
      .def_property_readonly("is_constant", [](const HistoryFunction &h) {
        return h.kind() == HistoryFunction::Kind::Constant;
      })
      .def("eval", &HistoryFunction::eval, py::arg("t"))
      .def("__call__", &HistoryFunction::eval, py::arg("t"));

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("t0", &Trajectory::t0)
      .def_property_readonly("t_end", &Trajectory::t_end)
      .def_property_readonly("step", &Trajectory::step)
      .def_property_readonly("tau", &Trajectory::tau)
      .def("__len__", &Trajectory::size)
      .def("node_time", &Trajectory::node_time, py::arg("k"))
      .def("node", &Trajectory::node, py::arg("k"))
      .def("eval", &Trajectory::eval, py::arg("t"))
      .def("__call__", &Trajectory::eval, py::arg("t"))
      .def("times", [](const Trajectory &t) {
        std::vector<double> out(t.size());
        for (std::size_t k = 0; k < out.size(); ++k)
          out[k] = t.node_time(k);
        return out;
      })
      .def("states", &Trajectory::states)
      .def("write_csv", [](const Trajectory &t, const std::string &path) {
        write_trajectory_csv(path, t);
      });

  m.attr("DEFAULT_STEPS_PER_DELAY") = kDefaultStepsPerDelay;
  m.def("solve_dde", &solve_dde, py::arg("params"), py::arg("history"),
        py::arg("t0"), py::arg("t_end"),
        py::arg("steps_per_delay") = kDefaultStepsPerDelay);

  // synthetic data
  py::class_<SolveGrid>(m, "SolveGrid")
      .def(py::init([](double t0, double t_end, int n) {
             return SolveGrid{t0, t_end, n};
           }),
           py::arg("t0") = 0.0, py::arg("t_end") = 5.0,
           py::arg("steps_per_delay") = kDefaultStepsPerDelay)
      .def_readwrite("t0", &SolveGrid::t0)
      .def_readwrite("t_end", &SolveGrid::t_end)
      .def_readwrite("steps_per_delay", &SolveGrid::steps_per_delay);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("times", &Dataset::times)
      .def_readonly("x_obs", &Dataset::x_obs)
      .def_readonly("y_obs", &Dataset::y_obs)
      .def_readonly("noise_sigma", &Dataset::noise_sigma)
      .def_readonly("seed", &Dataset::seed)
      .def_readonly("truth", &Dataset::truth)
      .def("__len__", &Dataset::size)
      .def("write_csv", [](const Dataset &d, const std::string &path) {
        write_dataset_csv(path, d);
      });

  m.def("generate_dataset", &generate_dataset, py::arg("params"),
        py::arg("history"), py::arg("grid"), py::arg("n_points"),
        py::arg("sigma"), py::arg("seed"));
  m.def("read_dataset_csv",
        py::overload_cast<const std::string &>(&read_dataset_csv),
        py::arg("path"));

  // least squares
  py::class_<ParameterPair>(m, "ParameterPair")
      .def(py::init<double, double>(), py::arg("alpha"), py::arg("beta"))
      .def(py::init([](const py::tuple &t) {
        if (t.size() != 2)
          throw py::value_error("expected (alpha, beta)");
        return ParameterPair{t[0].cast<double>(), t[1].cast<double>()};
      }))
      .def_readwrite("alpha", &ParameterPair::alpha)
      .def_readwrite("beta", &ParameterPair::beta)
      .def(py::self == py::self)
      .def("__iter__", [](const ParameterPair &p) {
        return py::iter(py::make_tuple(p.alpha, p.beta));
      })
      .def("__repr__", &repr_pair);
  py::implicitly_convertible<py::tuple, ParameterPair>();

  py::class_<ResidualProblem>(m, "ResidualProblem")
      .def(py::init([](Dataset d, ModelParams model, HistoryFunction history,
                       SolveGrid grid) {
             return ResidualProblem{std::move(d), model, std::move(history), grid};
           }),
           py::arg("dataset"), py::arg("model"), py::arg("history"),
           py::arg("grid"))
      .def_readonly("dataset", &ResidualProblem::dataset)
      .def_property_readonly("residual_size", &ResidualProblem::residual_size);

  m.def("residuals", &residuals, py::arg("problem"), py::arg("p"));
  m.def("objective", &objective, py::arg("problem"), py::arg("p"));

  py::class_<Jacobian>(m, "Jacobian")
      .def_readonly("d_alpha", &Jacobian::d_alpha)
      .def_readonly("d_beta", &Jacobian::d_beta)
      .def_readonly("evaluations", &Jacobian::evaluations);
  m.def("fd_jacobian",
        py::overload_cast<const ResidualProblem &, const ParameterPair &>(
            &fd_jacobian),
        py::arg("problem"), py::arg("p"));

  py::enum_<Algorithm>(m, "Algorithm")
      .value("LevenbergMarquardt", Algorithm::LevenbergMarquardt)
      .value("TrustRegion", Algorithm::TrustRegion);
  py::enum_<Termination>(m, "Termination")
      .value("StepTolerance", Termination::StepTolerance)
      .value("FunctionTolerance", Termination::FunctionTolerance)
      .value("GradientTolerance", Termination::GradientTolerance)
      .value("MaxIterations", Termination::MaxIterations)
      .def_property_readonly("label", [](Termination t) { return std::string(to_string(t)); });

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("step_tol", &SolverOptions::step_tol)
      .def_readwrite("fun_tol", &SolverOptions::fun_tol)
      .def_readwrite("grad_tol", &SolverOptions::grad_tol)
      .def_readwrite("max_iter", &SolverOptions::max_iter)
      .def_readwrite("max_evaluations", &SolverOptions::max_evaluations)
      .def_readwrite("lambda0", &SolverOptions::lambda0)
      .def_readwrite("radius0", &SolverOptions::radius0)
      .def_readwrite("radius_max", &SolverOptions::radius_max);

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("iteration", &IterationRecord::iteration)
      .def_readonly("function_count", &IterationRecord::function_count)
      .def_readonly("residual", &IterationRecord::residual)
      .def_readonly("first_order_optimality",
                    &IterationRecord::first_order_optimality)
      .def_readonly("lambda_", &IterationRecord::lambda)
      .def_readonly("step_norm", &IterationRecord::step_norm)
      .def_readonly("trust_radius", &IterationRecord::trust_radius);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("algorithm", &FitResult::algorithm)
      .def_readonly("best_fit", &FitResult::best_fit)
      .def_readonly("final_residual", &FitResult::final_residual)
      .def_readonly("termination", &FitResult::termination)
      .def_readonly("trace", &FitResult::trace)
      .def_readonly("function_count", &FitResult::function_count)
      .def_readonly("rejected_steps", &FitResult::rejected_steps)
      .def_property_readonly("iterations", &FitResult::iterations)
      .def("write_trace_csv", [](const FitResult &f, const std::string &path) {
        write_trace_csv(path, f);
      });

  m.def("solve_lm", &solve_lm, py::arg("problem"), py::arg("p0"),
        py::arg("options") = SolverOptions{});
  m.def("solve_trust_region", &solve_trust_region, py::arg("problem"),
        py::arg("p0"), py::arg("options") = SolverOptions{});

  // experiment harness
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("name", &ExperimentConfig::name)
      .def_readwrite("truth", &ExperimentConfig::truth)
      .def_readwrite("p0", &ExperimentConfig::p0)
      .def_readwrite("sigma", &ExperimentConfig::sigma)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("n_points", &ExperimentConfig::n_points)
      .def_readwrite("grid", &ExperimentConfig::grid)
      .def_readwrite("run_lm", &ExperimentConfig::run_lm)
      .def_readwrite("run_tr", &ExperimentConfig::run_tr)
      .def_readwrite("out_dir", &ExperimentConfig::out_dir)
      .def_property(
          "history",
          [](const ExperimentConfig &c) -> py::object {
            if (c.history.kind == HistorySpec::Kind::Equilibrium)
              return py::str("equilibrium");
            return py::cast(c.history.value);
          },
          [](ExperimentConfig &c, py::object v) {
            if (py::isinstance<py::str>(v)) {
              if (v.cast<std::string>() != "equilibrium")
                throw ConfigError("history", "expected 'equilibrium' or a State");
              c.history.kind = HistorySpec::Kind::Equilibrium;
            } else {
              c.history.kind = HistorySpec::Kind::Constant;
              c.history.value = v.cast<State>();
            }
          })
      .def("validate", &ExperimentConfig::validate)
      .def("format", &format_config, py::arg("with_out_dir") = true);

  m.attr("EXAMPLE_NAMES") = py::cast(std::vector<std::string>(
      kExampleNames.begin(), kExampleNames.end()));
  m.def("preset", &preset, py::arg("name"), py::arg("seed") = 1);
  m.def(
      "parse_config",
      [](const std::string &text) {
        std::istringstream in(text);
        return parse_config(in);
      },
      py::arg("text"));
  m.def("load_config", &load_config, py::arg("path"));

  py::class_<AlgorithmSummary>(m, "AlgorithmSummary")
      .def_readonly("fit", &AlgorithmSummary::fit)
      .def_readonly("iterations", &AlgorithmSummary::iterations)
      .def_readonly("function_count", &AlgorithmSummary::function_count)
      .def_readonly("final_residual", &AlgorithmSummary::final_residual)
      .def_readonly("final_first_order_optimality",
                    &AlgorithmSummary::final_first_order_optimality)
      .def_readonly("termination", &AlgorithmSummary::termination)
      .def_readonly("rel_error_alpha_pct", &AlgorithmSummary::rel_error_alpha_pct)
      .def_readonly("rel_error_beta_pct", &AlgorithmSummary::rel_error_beta_pct);

  py::class_<SummaryRow>(m, "SummaryRow")
      .def_readonly("example", &SummaryRow::example)
      .def_readonly("initial", &SummaryRow::initial)
      .def_readonly("truth", &SummaryRow::truth)
      .def_readonly("sigma", &SummaryRow::sigma)
      .def_readonly("seed", &SummaryRow::seed)
      .def_readonly("n_points", &SummaryRow::n_points)
      .def_readonly("lm", &SummaryRow::lm)
      .def_readonly("tr", &SummaryRow::tr);

  py::class_<ErrorStats>(m, "ErrorStats")
      .def_readonly("mean_alpha_pct", &ErrorStats::mean_alpha_pct)
      .def_readonly("max_alpha_pct", &ErrorStats::max_alpha_pct)
      .def_readonly("mean_beta_pct", &ErrorStats::mean_beta_pct)
      .def_readonly("max_beta_pct", &ErrorStats::max_beta_pct)
      .def_readonly("mean_fit", &ErrorStats::mean_fit)
      .def_readonly("max_iterations", &ErrorStats::max_iterations);

  py::class_<SummaryAggregate>(m, "SummaryAggregate")
      .def_readonly("example", &SummaryAggregate::example)
      .def_readonly("initial", &SummaryAggregate::initial)
      .def_readonly("sigma", &SummaryAggregate::sigma)
      .def_readonly("runs", &SummaryAggregate::runs)
      .def_readonly("lm", &SummaryAggregate::lm)
      .def_readonly("tr", &SummaryAggregate::tr)
      .def_readonly("max_lm_tr_difference",
                    &SummaryAggregate::max_lm_tr_difference);

  py::class_<SummaryReport>(m, "SummaryReport")
      .def_readonly("seeds", &SummaryReport::seeds)
      .def_readonly("rows", &SummaryReport::rows)
      .def_readonly("table", &SummaryReport::table)
      .def("format_table", [](const SummaryReport &r) {
        return format_summary_table(r.table);
      });

  m.def("run_config", &run_config, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("run_example", &run_example, py::arg("name"), py::arg("seed") = 1,
        py::arg("out_dir"), py::arg("sigma") = py::none(),
        py::call_guard<py::gil_scoped_release>());
  m.def("run_summary", &run_summary, py::arg("seeds"), py::arg("out_dir"),
        py::call_guard<py::gil_scoped_release>());
}
