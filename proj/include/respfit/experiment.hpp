#pragma once

/**
 * @file experiment.hpp
 * @brief End-to-end runs: generate data, fit with both solvers, write the
 * traces, fitted curves, error histograms and a summary record.
 *
 * A run directory holds
 *   config.txt          replayable configuration (without out_dir)
 *   dataset.csv         t,x_obs,y_obs
 *   dataset.meta.json   seed, sigma, truth, history, grid
 *   trace_<alg>.csv     convergence table per algorithm
 *   fit_<alg>.csv       trajectory at the best fit, t,x,y
 *   hist_<alg>_x.csv    histogram of data minus fit, bin_lo,bin_hi,count
 *   hist_<alg>_y.csv
 *   summary.json
 * with <alg> in {lm, tr}.
 */

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "respfit/data.hpp"
#include "respfit/dde.hpp"
#include "respfit/model.hpp"
#include "respfit/nlls.hpp"

namespace respfit {

struct HistorySpec {
  enum class Kind { Constant, Equilibrium };
  Kind kind = Kind::Constant;
  State value{35.0, 35.0}; ///< used by Constant only
};

/// Equilibrium histories are solved at the truth parameters.
HistoryFunction resolve_history(const HistorySpec &spec,
                                const ModelParams &truth);

struct ExperimentConfig {
  std::string name = "custom";
  ModelParams truth;
  ParameterPair p0{0.3, 0.5};
  double sigma = 0.20;
  std::uint64_t seed = 1;
  int n_points = 51;
  HistorySpec history;
  SolveGrid grid;
  bool run_lm = true;
  bool run_tr = true;
  std::string out_dir = "out";

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

inline constexpr std::array<std::string_view, 5> kExampleNames{
    "ex1", "ex2", "ex3", "ex4", "ex5"};

/// ex1: p0 (0.3, 0.5), sigma 0.20      ex2: p0 (0.01, 0.01), sigma 0.20
/// ex3: p0 (0.3, 0.5), sigma 0.40      ex4: p0 (0.01, 0.01), sigma 0.40
/// ex5: p0 (0.01, 0.01), sigma 0.20, history at the equilibrium.
/// Truth is alpha 0.5, beta 0.8, tau 1 on [0, 5]. Throws ConfigError for an
/// unknown name.
ExperimentConfig preset(std::string_view name, std::uint64_t seed = 1);

/// Flat `key = value` text; `#` starts a comment. Unknown or repeated keys
/// are ConfigErrors.
ExperimentConfig parse_config(std::istream &in);
ExperimentConfig load_config(const std::string &path);
/// Inverse of parse_config. out_dir is omitted when `with_out_dir` is false.
std::string format_config(const ExperimentConfig &config,
                          bool with_out_dir = true);

double relative_error_percent(double fit, double truth);

struct AlgorithmSummary {
  ParameterPair fit;
  int iterations = 0;
  int function_count = 0;
  double final_residual = 0.0;
  double final_first_order_optimality = 0.0;
  Termination termination = Termination::MaxIterations;
  double rel_error_alpha_pct = 0.0;
  double rel_error_beta_pct = 0.0;
};

struct SummaryRow {
  std::string example;
  ParameterPair initial;
  ParameterPair truth;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  int n_points = 0;
  std::optional<AlgorithmSummary> lm;
  std::optional<AlgorithmSummary> tr;
};

/// Fills the relative errors from the fit and the truth.
AlgorithmSummary summarize(const FitResult &fit, const ParameterPair &truth);

struct ErrorHistogram {
  std::vector<double> edges; ///< bins + 1 values
  std::vector<int> counts;
};

/// Equal-width bins on [-4 sigma, 4 sigma]; values beyond the range land in
/// the end bins so the counts always sum to errors.size(). With sigma = 0 the
/// range is [-max|e|, max|e|], or [-1, 1] when every error is zero.
ErrorHistogram error_histogram(const std::vector<double> &errors, double sigma,
                               int bins = 10);

/// Generates, fits and writes one run into config.out_dir.
/// Throws ConfigError, StageError (naming the stage) or IoError.
SummaryRow run_config(const ExperimentConfig &config);

/// run_config on a preset, optionally overriding sigma.
SummaryRow run_example(std::string_view name, std::uint64_t seed,
                       const std::string &out_dir,
                       std::optional<double> sigma = std::nullopt);

struct ErrorStats {
  double mean_alpha_pct = 0.0;
  double max_alpha_pct = 0.0;
  double mean_beta_pct = 0.0;
  double max_beta_pct = 0.0;
  ParameterPair mean_fit;
  int max_iterations = 0;
};

struct SummaryAggregate {
  std::string example;
  ParameterPair initial;
  double sigma = 0.0;
  std::size_t runs = 0;
  ErrorStats lm;
  ErrorStats tr;
  /// max over seeds of the componentwise |LM fit - TR fit|
  double max_lm_tr_difference = 0.0;
};

struct SummaryReport {
  std::vector<std::uint64_t> seeds;
  std::vector<SummaryRow> rows; ///< seed-major, then example order
  std::vector<SummaryAggregate> table;
};

/// Runs every preset for each seed into out_dir/seed_<N>/<example>/, then
/// writes out_dir/summary.json and out_dir/summary.txt. Seeds run on
/// separate threads; output does not depend on scheduling.
SummaryReport run_summary(const std::vector<std::uint64_t> &seeds,
                          const std::string &out_dir);

std::vector<SummaryAggregate> aggregate(const std::vector<SummaryRow> &rows);
std::string format_summary_table(const std::vector<SummaryAggregate> &table);

} // namespace respfit
