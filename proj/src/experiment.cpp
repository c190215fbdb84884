#include "respfit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "respfit/errors.hpp"

namespace respfit {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

HistoryFunction resolve_history(const HistorySpec &spec,
                                const ModelParams &truth) {
  if (spec.kind == HistorySpec::Kind::Equilibrium) {
    const EquilibriumPoint eq = equilibrium_solve(truth);
    return HistoryFunction::constant({eq.x_star, eq.y_star});
  }
  return HistoryFunction::constant(spec.value);
}

double relative_error_percent(double fit, double truth) {
  return std::abs(fit - truth) / std::abs(truth) * 100.0;
}

AlgorithmSummary summarize(const FitResult &fit, const ParameterPair &truth) {
  AlgorithmSummary s;
  s.fit = fit.best_fit;
  s.iterations = fit.iterations();
  s.function_count = fit.function_count;
  s.final_residual = fit.final_residual;
  s.final_first_order_optimality =
      fit.trace.empty() ? 0.0 : fit.trace.back().first_order_optimality;
  s.termination = fit.termination;
  s.rel_error_alpha_pct = relative_error_percent(fit.best_fit.alpha, truth.alpha);
  s.rel_error_beta_pct = relative_error_percent(fit.best_fit.beta, truth.beta);
  return s;
}

ErrorHistogram error_histogram(const std::vector<double> &errors, double sigma,
                               int bins) {
  if (bins < 1)
    throw std::invalid_argument("histogram needs at least one bin");
  double half = 4.0 * sigma;
  if (!(half > 0.0)) {
    half = 0.0;
    for (double e : errors)
      half = std::max(half, std::abs(e));
    if (half == 0.0)
      half = 1.0;
  }
  ErrorHistogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  const double width = 2.0 * half / bins;
  for (int i = 0; i <= bins; ++i)
    h.edges[static_cast<std::size_t>(i)] = -half + i * width;
  h.edges.back() = half;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double e : errors) {
    const int bin =
        std::clamp(static_cast<int>(std::floor((e + half) / width)), 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  return h;
}

namespace {

std::ofstream open_out(const fs::path &path) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void close_out(std::ofstream &out, const fs::path &path) {
  out.flush();
  if (!out)
    throw IoError("failed writing " + path.string());
}

void write_text(const fs::path &path, const std::string &text) {
  auto out = open_out(path);
  out << text;
  close_out(out, path);
}

void write_histogram_csv(const fs::path &path, const ErrorHistogram &h) {
  auto out = open_out(path);
  out << std::setprecision(17) << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    out << h.edges[i] << ',' << h.edges[i + 1] << ',' << h.counts[i] << '\n';
  close_out(out, path);
}

ojson pair_json(const ParameterPair &p) {
  return {{"alpha", p.alpha}, {"beta", p.beta}};
}

ojson algorithm_json(const AlgorithmSummary &s) {
  return {{"fit", pair_json(s.fit)},
          {"iterations", s.iterations},
          {"function_count", s.function_count},
          {"final_residual", s.final_residual},
          {"final_first_order_optimality", s.final_first_order_optimality},
          {"termination", std::string(to_string(s.termination))},
          {"rel_error_alpha_pct", s.rel_error_alpha_pct},
          {"rel_error_beta_pct", s.rel_error_beta_pct}};
}

ojson row_json(const SummaryRow &row) {
  ojson j;
  j["example"] = row.example;
  j["seed"] = row.seed;
  j["sigma"] = row.sigma;
  j["n_points"] = row.n_points;
  j["initial"] = pair_json(row.initial);
  j["truth"] = pair_json(row.truth);
  if (row.lm)
    j["lm"] = algorithm_json(*row.lm);
  if (row.tr)
    j["tr"] = algorithm_json(*row.tr);
  return j;
}

/// Runs one solver and writes its trace, fitted curve and histograms.
AlgorithmSummary fit_and_write(const ResidualProblem &problem,
                               const ExperimentConfig &config, Algorithm alg,
                               const fs::path &dir) {
  const std::string tag = alg == Algorithm::LevenbergMarquardt ? "lm" : "tr";
  FitResult fit;
  Trajectory curve = [&] {
    try {
      fit = alg == Algorithm::LevenbergMarquardt
                ? solve_lm(problem, config.p0)
                : solve_trust_region(problem, config.p0);
      ModelParams best = problem.model;
      best.alpha = fit.best_fit.alpha;
      best.beta = fit.best_fit.beta;
      return solve_dde(best, problem.history, problem.grid.t0,
                       problem.grid.t_end, problem.grid.steps_per_delay);
    } catch (const SolverError &e) {
      throw StageError("fit-" + tag, e.what());
    }
  }();

  write_trace_csv((dir / ("trace_" + tag + ".csv")).string(), fit);
  write_trajectory_csv((dir / ("fit_" + tag + ".csv")).string(), curve);

  // data minus fit = -residual
  const std::size_t m = problem.dataset.size();
  std::vector<double> ex(m), ey(m);
  for (std::size_t i = 0; i < m; ++i) {
    ex[i] = -fit.final_residuals[i];
    ey[i] = -fit.final_residuals[m + i];
  }
  write_histogram_csv(dir / ("hist_" + tag + "_x.csv"),
                      error_histogram(ex, config.sigma));
  write_histogram_csv(dir / ("hist_" + tag + "_y.csv"),
                      error_histogram(ey, config.sigma));

  return summarize(fit, {config.truth.alpha, config.truth.beta});
}

} // namespace

SummaryRow run_config(const ExperimentConfig &config) {
  config.validate();
  const fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create " + dir.string() + ": " + ec.message());

  HistoryFunction history;
  Dataset data;
  try {
    history = resolve_history(config.history, config.truth);
    data = generate_dataset(config.truth, history, config.grid,
                            config.n_points, config.sigma, config.seed);
  } catch (const SolverError &e) {
    throw StageError("generate", e.what());
  }

  write_text(dir / "config.txt", format_config(config, false));
  write_dataset_csv((dir / "dataset.csv").string(), data);
  write_dataset_metadata((dir / "dataset.meta.json").string(), data, history,
                         config.grid);

  ResidualProblem problem{data, config.truth, history, config.grid};

  SummaryRow row;
  row.example = config.name;
  row.initial = config.p0;
  row.truth = {config.truth.alpha, config.truth.beta};
  row.sigma = config.sigma;
  row.seed = config.seed;
  row.n_points = config.n_points;
  if (config.run_lm)
    row.lm = fit_and_write(problem, config, Algorithm::LevenbergMarquardt, dir);
  if (config.run_tr)
    row.tr = fit_and_write(problem, config, Algorithm::TrustRegion, dir);

  write_text(dir / "summary.json", row_json(row).dump(2) + "\n");
  return row;
}

SummaryRow run_example(std::string_view name, std::uint64_t seed,
                       const std::string &out_dir,
                       std::optional<double> sigma) {
  ExperimentConfig config = preset(name, seed);
  config.out_dir = out_dir;
  if (sigma)
    config.sigma = *sigma;
  return run_config(config);
}

std::vector<SummaryAggregate> aggregate(const std::vector<SummaryRow> &rows) {
  std::vector<SummaryAggregate> table;
  auto slot = [&](const SummaryRow &row) -> SummaryAggregate & {
    for (auto &agg : table)
      if (agg.example == row.example)
        return agg;
    SummaryAggregate agg;
    agg.example = row.example;
    agg.initial = row.initial;
    agg.sigma = row.sigma;
    table.push_back(agg);
    return table.back();
  };
  auto accumulate = [](ErrorStats &stats, const AlgorithmSummary &s) {
    stats.mean_alpha_pct += s.rel_error_alpha_pct;
    stats.mean_beta_pct += s.rel_error_beta_pct;
    stats.max_alpha_pct = std::max(stats.max_alpha_pct, s.rel_error_alpha_pct);
    stats.max_beta_pct = std::max(stats.max_beta_pct, s.rel_error_beta_pct);
    stats.mean_fit.alpha += s.fit.alpha;
    stats.mean_fit.beta += s.fit.beta;
    stats.max_iterations = std::max(stats.max_iterations, s.iterations);
  };

  for (const SummaryRow &row : rows) {
    SummaryAggregate &agg = slot(row);
    ++agg.runs;
    if (row.lm)
      accumulate(agg.lm, *row.lm);
    if (row.tr)
      accumulate(agg.tr, *row.tr);
    if (row.lm && row.tr)
      agg.max_lm_tr_difference = std::max(
          {agg.max_lm_tr_difference,
           std::abs(row.lm->fit.alpha - row.tr->fit.alpha),
           std::abs(row.lm->fit.beta - row.tr->fit.beta)});
  }
  for (SummaryAggregate &agg : table) {
    const double n = static_cast<double>(agg.runs);
    for (ErrorStats *stats : {&agg.lm, &agg.tr}) {
      stats->mean_alpha_pct /= n;
      stats->mean_beta_pct /= n;
      stats->mean_fit.alpha /= n;
      stats->mean_fit.beta /= n;
    }
  }
  return table;
}

std::string format_summary_table(const std::vector<SummaryAggregate> &table) {
  std::ostringstream out;
  out << std::fixed;
  out << std::left << std::setw(8) << "example" << std::right
      << std::setw(16) << "initial" << std::setw(7) << "noise"
      << std::setw(6) << "runs" << std::setw(18) << "LM fit"
      << std::setw(18) << "TR fit" << std::setw(11) << "LM da%"
      << std::setw(11) << "LM db%" << std::setw(11) << "TR da%"
      << std::setw(11) << "TR db%" << std::setw(8) << "LM it"
      << std::setw(8) << "TR it" << std::setw(12) << "|LM-TR|" << '\n';
  auto pair_text = [](const ParameterPair &p) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << '(' << p.alpha << ", "
      << p.beta << ')';
    return s.str();
  };
  auto err_text = [](double mean, double max) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << mean << '/' << max;
    return s.str();
  };
  for (const SummaryAggregate &a : table) {
    out << std::left << std::setw(8) << a.example << std::right
        << std::setw(16) << pair_text(a.initial) << std::setw(7)
        << std::setprecision(2) << a.sigma << std::setw(6) << a.runs
        << std::setw(18) << pair_text(a.lm.mean_fit) << std::setw(18)
        << pair_text(a.tr.mean_fit) << std::setw(11)
        << err_text(a.lm.mean_alpha_pct, a.lm.max_alpha_pct) << std::setw(11)
        << err_text(a.lm.mean_beta_pct, a.lm.max_beta_pct) << std::setw(11)
        << err_text(a.tr.mean_alpha_pct, a.tr.max_alpha_pct) << std::setw(11)
        << err_text(a.tr.mean_beta_pct, a.tr.max_beta_pct) << std::setw(8)
        << a.lm.max_iterations << std::setw(8) << a.tr.max_iterations
        << std::setw(12) << std::scientific << std::setprecision(2)
        << a.max_lm_tr_difference << std::fixed << '\n';
  }
  out << "fits are means over runs; errors are mean/max relative error in "
         "percent; iterations are the max over runs\n";
  return out.str();
}

SummaryReport run_summary(const std::vector<std::uint64_t> &seeds,
                          const std::string &out_dir) {
  if (seeds.empty())
    throw ConfigError("seeds", "at least one seed is required");

  const std::size_t per_seed = kExampleNames.size();
  SummaryReport report;
  report.seeds = seeds;
  report.rows.resize(seeds.size() * per_seed);
  std::vector<std::exception_ptr> failures(seeds.size());

  auto run_seed = [&](std::size_t s) {
    try {
      const fs::path seed_dir =
          fs::path(out_dir) / ("seed_" + std::to_string(seeds[s]));
      for (std::size_t e = 0; e < per_seed; ++e)
        report.rows[s * per_seed + e] =
            run_example(kExampleNames[e], seeds[s],
                        (seed_dir / std::string(kExampleNames[e])).string());
    } catch (...) {
      failures[s] = std::current_exception();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(
      std::thread::hardware_concurrency(), 1, seeds.size());
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t s = w; s < seeds.size(); s += workers)
        run_seed(s);
    });
  for (auto &t : pool)
    t.join();
  for (const auto &failure : failures)
    if (failure)
      std::rethrow_exception(failure);

  report.table = aggregate(report.rows);

  ojson j;
  j["seeds"] = seeds;
  j["table"] = ojson::array();
  for (const SummaryAggregate &a : report.table) {
    auto stats_json = [](const ErrorStats &s) {
      return ojson{{"mean_fit", pair_json(s.mean_fit)},
                   {"mean_rel_error_alpha_pct", s.mean_alpha_pct},
                   {"max_rel_error_alpha_pct", s.max_alpha_pct},
                   {"mean_rel_error_beta_pct", s.mean_beta_pct},
                   {"max_rel_error_beta_pct", s.max_beta_pct},
                   {"max_iterations", s.max_iterations}};
    };
    j["table"].push_back({{"example", a.example},
                          {"initial", pair_json(a.initial)},
                          {"sigma", a.sigma},
                          {"runs", a.runs},
                          {"lm", stats_json(a.lm)},
                          {"tr", stats_json(a.tr)},
                          {"max_lm_tr_difference", a.max_lm_tr_difference}});
  }
  j["runs"] = ojson::array();
  for (const SummaryRow &row : report.rows)
    j["runs"].push_back(row_json(row));

  const fs::path root(out_dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec)
    throw IoError("cannot create " + root.string() + ": " + ec.message());
  write_text(root / "summary.json", j.dump(2) + "\n");
  write_text(root / "summary.txt", format_summary_table(report.table));
  return report;
}

} // namespace respfit
