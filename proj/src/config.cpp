#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "respfit/errors.hpp"
#include "respfit/experiment.hpp"

namespace respfit {

namespace {

std::string trim(const std::string &s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string &key, const std::string &value) {
  double v = 0.0;
  const char *end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v))
    throw ConfigError(key, "expected a finite number, got '" + value + "'");
  return v;
}

template <typename Int>
Int to_integer(const std::string &key, const std::string &value) {
  Int v{};
  const char *end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError(key, "expected an integer, got '" + value + "'");
  return v;
}

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

} // namespace

void ExperimentConfig::validate() const {
  try {
    truth.validate();
  } catch (const std::invalid_argument &e) {
    throw ConfigError("truth", e.what());
  }
  if (!std::isfinite(p0.alpha))
    throw ConfigError("alpha0", "must be finite");
  if (!std::isfinite(p0.beta))
    throw ConfigError("beta0", "must be finite");
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw ConfigError("sigma", "must be finite and >= 0");
  if (n_points < 2)
    throw ConfigError("n_points", "must be >= 2");
  if (!std::isfinite(grid.t0))
    throw ConfigError("t0", "must be finite");
  if (!(grid.t_end > grid.t0) || !std::isfinite(grid.t_end))
    throw ConfigError("t_end", "must exceed t0");
  if (grid.steps_per_delay < 2)
    throw ConfigError("steps_per_delay", "must be >= 2");
  const double steps =
      (grid.t_end - grid.t0) * grid.steps_per_delay / truth.tau;
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
    throw ConfigError("t_end", "t_end - t0 must be a multiple of tau / "
                               "steps_per_delay");
  if (history.kind == HistorySpec::Kind::Constant &&
      !(std::isfinite(history.value.x) && std::isfinite(history.value.y)))
    throw ConfigError("history", "constant history must be finite");
  if (!run_lm && !run_tr)
    throw ConfigError("algorithms", "at least one of lm, tr is required");
  if (out_dir.empty())
    throw ConfigError("out_dir", "must not be empty");
}

ExperimentConfig preset(std::string_view name, std::uint64_t seed) {
  ExperimentConfig c;
  c.name = std::string(name);
  c.seed = seed;
  c.out_dir = "out/" + c.name;
  const ParameterPair near{0.3, 0.5};
  const ParameterPair far{0.01, 0.01};
  if (name == "ex1") {
    c.p0 = near;
    c.sigma = 0.20;
  } else if (name == "ex2") {
    c.p0 = far;
    c.sigma = 0.20;
  } else if (name == "ex3") {
    c.p0 = near;
    c.sigma = 0.40;
  } else if (name == "ex4") {
    c.p0 = far;
    c.sigma = 0.40;
  } else if (name == "ex5") {
    c.p0 = far;
    c.sigma = 0.20;
    c.history.kind = HistorySpec::Kind::Equilibrium;
  } else {
    throw ConfigError("name", "unknown example '" + c.name +
                                  "' (expected ex1..ex5)");
  }
  return c;
}

ExperimentConfig parse_config(std::istream &in) {
  ExperimentConfig c;
  std::set<std::string> seen;
  bool has_history_value = false;
  std::string line;
  int line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no),
                        "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no), "missing key");
    if (!seen.insert(key).second)
      throw ConfigError(key, "given more than once");

    if (key == "name") {
      c.name = value;
    } else if (key == "alpha") {
      c.truth.alpha = to_double(key, value);
    } else if (key == "beta") {
      c.truth.beta = to_double(key, value);
    } else if (key == "tau") {
      c.truth.tau = to_double(key, value);
    } else if (key == "vent_gain") {
      c.truth.vent_gain = to_double(key, value);
    } else if (key == "vent_rate") {
      c.truth.vent_rate = to_double(key, value);
    } else if (key == "vent_offset") {
      c.truth.vent_offset = to_double(key, value);
    } else if (key == "alpha0") {
      c.p0.alpha = to_double(key, value);
    } else if (key == "beta0") {
      c.p0.beta = to_double(key, value);
    } else if (key == "sigma") {
      c.sigma = to_double(key, value);
    } else if (key == "seed") {
      c.seed = to_integer<std::uint64_t>(key, value);
    } else if (key == "n_points") {
      c.n_points = to_integer<int>(key, value);
    } else if (key == "history") {
      if (value == "constant")
        c.history.kind = HistorySpec::Kind::Constant;
      else if (value == "equilibrium")
        c.history.kind = HistorySpec::Kind::Equilibrium;
      else
        throw ConfigError(key, "expected 'constant' or 'equilibrium', got '" +
                                   value + "'");
    } else if (key == "history_x") {
      c.history.value.x = to_double(key, value);
      has_history_value = true;
    } else if (key == "history_y") {
      c.history.value.y = to_double(key, value);
      has_history_value = true;
    } else if (key == "t0") {
      c.grid.t0 = to_double(key, value);
    } else if (key == "t_end") {
      c.grid.t_end = to_double(key, value);
    } else if (key == "steps_per_delay") {
      c.grid.steps_per_delay = to_integer<int>(key, value);
    } else if (key == "algorithms") {
      c.run_lm = false;
      c.run_tr = false;
      std::stringstream list(value);
      std::string item;
      while (std::getline(list, item, ',')) {
        item = trim(item);
        if (item == "lm")
          c.run_lm = true;
        else if (item == "tr")
          c.run_tr = true;
        else
          throw ConfigError(key, "unknown algorithm '" + item +
                                     "' (expected lm, tr)");
      }
    } else if (key == "out_dir") {
      c.out_dir = value;
    } else {
      throw ConfigError(key, "unknown key");
    }
  }

  if (has_history_value && c.history.kind == HistorySpec::Kind::Equilibrium)
    throw ConfigError("history_x", "only valid with history = constant");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open config " + path);
  return parse_config(in);
}

std::string format_config(const ExperimentConfig &c, bool with_out_dir) {
  std::ostringstream out;
  out << "name = " << c.name << '\n'
      << "alpha = " << shortest(c.truth.alpha) << '\n'
      << "beta = " << shortest(c.truth.beta) << '\n'
      << "tau = " << shortest(c.truth.tau) << '\n'
      << "vent_gain = " << shortest(c.truth.vent_gain) << '\n'
      << "vent_rate = " << shortest(c.truth.vent_rate) << '\n'
      << "vent_offset = " << shortest(c.truth.vent_offset) << '\n'
      << "alpha0 = " << shortest(c.p0.alpha) << '\n'
      << "beta0 = " << shortest(c.p0.beta) << '\n'
      << "sigma = " << shortest(c.sigma) << '\n'
      << "seed = " << c.seed << '\n'
      << "n_points = " << c.n_points << '\n';
  if (c.history.kind == HistorySpec::Kind::Equilibrium) {
    out << "history = equilibrium\n";
  } else {
    out << "history = constant\n"
        << "history_x = " << shortest(c.history.value.x) << '\n'
        << "history_y = " << shortest(c.history.value.y) << '\n';
  }
  out << "t0 = " << shortest(c.grid.t0) << '\n'
      << "t_end = " << shortest(c.grid.t_end) << '\n'
      << "steps_per_delay = " << c.grid.steps_per_delay << '\n'
      << "algorithms = ";
  if (c.run_lm && c.run_tr)
    out << "lm,tr";
  else if (c.run_lm)
    out << "lm";
  else
    out << "tr";
  out << '\n';
  if (with_out_dir)
    out << "out_dir = " << c.out_dir << '\n';
  return out.str();
}

} // namespace respfit
