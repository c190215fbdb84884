// respfit command line: replays the preset examples, runs a config file, or
// builds the multi-seed summary table.
//
// Exit codes: 0 success, 1 config error, 2 solver failure, 3 IO failure.

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "respfit/errors.hpp"
#include "respfit/experiment.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;
constexpr int kExitIo = 3;

void print_row(const respfit::SummaryRow &row) {
  std::cout << row.example << " seed=" << row.seed << " sigma=" << row.sigma
            << " initial=(" << row.initial.alpha << ", " << row.initial.beta
            << ")\n";
  auto show = [](const char *tag, const respfit::AlgorithmSummary &s) {
    std::ostringstream line;
    line.setf(std::ios::fixed);
    line.precision(4);
    line << "  " << tag << ": alpha=" << s.fit.alpha << " beta=" << s.fit.beta
         << " iterations=" << s.iterations << " residual="
         << std::defaultfloat << s.final_residual << " ("
         << respfit::to_string(s.termination) << ")"
         << std::fixed << std::setprecision(2) << " err%=("
         << s.rel_error_alpha_pct << ", " << s.rel_error_beta_pct << ")\n";
    std::cout << line.str();
  };
  if (row.lm)
    show("LM", *row.lm);
  if (row.tr)
    show("TR", *row.tr);
}

std::vector<std::uint64_t> parse_seeds(const std::string &text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used == 0 || used != item.size())
      throw respfit::ConfigError("seeds", "cannot parse seed '" + item + "'");
    seeds.push_back(v);
  }
  if (seeds.empty())
    throw respfit::ConfigError("seeds", "at least one seed is required");
  return seeds;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Simulate the delayed respiratory model and fit (alpha, beta)"};
  app.require_subcommand(1);

  auto *example = app.add_subcommand("run-example", "Run a preset example");
  std::string name;
  std::uint64_t seed = 1;
  std::optional<double> sigma;
  std::string example_out;
  example->add_option("name", name, "ex1..ex5")->required();
  example->add_option("--seed", seed, "noise seed")->capture_default_str();
  example->add_option("--sigma", sigma, "override the noise standard deviation");
  example->add_option("--out", example_out, "output directory (default out/<name>)");

  auto *config = app.add_subcommand("run-config", "Run a key = value config file");
  std::string config_path;
  config->add_option("file", config_path, "config file")->required();

  auto *summary = app.add_subcommand("run-summary", "Run all presets over seeds");
  std::string seeds_text = "1";
  std::string summary_out = "out/summary";
  summary->add_option("--seeds", seeds_text, "comma separated seeds")
      ->capture_default_str();
  summary->add_option("--out", summary_out, "output directory")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*example) {
      if (example_out.empty())
        example_out = "out/" + name;
      print_row(respfit::run_example(name, seed, example_out, sigma));
      std::cout << "wrote " << example_out << '\n';
    } else if (*config) {
      const respfit::ExperimentConfig cfg = respfit::load_config(config_path);
      print_row(respfit::run_config(cfg));
      std::cout << "wrote " << cfg.out_dir << '\n';
    } else if (*summary) {
      const auto report = respfit::run_summary(parse_seeds(seeds_text), summary_out);
      std::cout << respfit::format_summary_table(report.table);
      std::cout << "wrote " << summary_out << '\n';
    }
  } catch (const respfit::ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const respfit::IoError &e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const respfit::SolverError &e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::invalid_argument &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return 0;
}
