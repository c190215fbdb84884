#include "respfit/data.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "respfit/errors.hpp"

namespace respfit {

double GaussianSampler::uniform_open() {
  const std::uint64_t w = engine_() >> 11;
  return (static_cast<double>(w) + 0.5) * 0x1.0p-53;
}

double GaussianSampler::standard() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

void Dataset::validate() const {
  if (times.size() != x_obs.size() || times.size() != y_obs.size())
    throw std::invalid_argument("Dataset: column lengths differ");
  if (times.size() < 2)
    throw std::invalid_argument("Dataset: at least two measurements required");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument("Dataset: times must be strictly increasing");
}

std::vector<double> uniform_times(double t0, double t_end, int n_points) {
  if (n_points < 2)
    throw std::invalid_argument("n_points must be >= 2");
  if (!(t_end > t0))
    throw std::invalid_argument("t_end must exceed t0");
  std::vector<double> times(static_cast<std::size_t>(n_points));
  const double spacing = (t_end - t0) / (n_points - 1);
  for (int i = 0; i < n_points; ++i)
    times[static_cast<std::size_t>(i)] = t0 + i * spacing;
  times.back() = t_end;
  return times;
}

Dataset generate_dataset(const ModelParams &params,
                         const HistoryFunction &history, const SolveGrid &grid,
                         int n_points, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("sigma must be finite and >= 0");

  Dataset data;
  data.times = uniform_times(grid.t0, grid.t_end, n_points);
  data.noise_sigma = sigma;
  data.seed = seed;
  data.truth = params;

  const Trajectory traj =
      solve_dde(params, history, grid.t0, grid.t_end, grid.steps_per_delay);

  const std::size_t m = data.times.size();
  data.x_obs.resize(m);
  data.y_obs.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const State s = traj.eval(data.times[i]);
    data.x_obs[i] = s.x;
    data.y_obs[i] = s.y;
  }

  GaussianSampler noise(seed);
  for (std::size_t i = 0; i < m; ++i)
    data.x_obs[i] += noise(sigma);
  for (std::size_t i = 0; i < m; ++i)
    data.y_obs[i] += noise(sigma);
  return data;
}

void write_dataset_csv(std::ostream &out, const Dataset &data) {
  const auto old_precision = out.precision(17);
  out << "t,x_obs,y_obs\n";
  for (std::size_t i = 0; i < data.size(); ++i)
    out << data.times[i] << ',' << data.x_obs[i] << ',' << data.y_obs[i]
        << '\n';
  out.precision(old_precision);
}

void write_dataset_csv(const std::string &path, const Dataset &data) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot open " + path + " for writing");
  write_dataset_csv(out, data);
  if (!out)
    throw IoError("failed writing " + path);
}

namespace {

double parse_double(const std::string &field, std::size_t line) {
  const char *begin = field.c_str();
  char *end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw IoError("dataset line " + std::to_string(line) +
                  ": cannot parse '" + field + "'");
  return v;
}

} // namespace

Dataset read_dataset_csv(std::istream &in) {
  std::string line;
  if (!std::getline(in, line))
    throw IoError("dataset: empty input");
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  if (line != "t,x_obs,y_obs")
    throw IoError("dataset: expected header 't,x_obs,y_obs', got '" + line +
                  "'");

  Dataset data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    std::stringstream row(line);
    std::string t, x, y, extra;
    if (!std::getline(row, t, ',') || !std::getline(row, x, ',') ||
        !std::getline(row, y, ',') || std::getline(row, extra, ','))
      throw IoError("dataset line " + std::to_string(line_no) +
                    ": expected 3 columns");
    data.times.push_back(parse_double(t, line_no));
    data.x_obs.push_back(parse_double(x, line_no));
    data.y_obs.push_back(parse_double(y, line_no));
  }
  try {
    data.validate();
  } catch (const std::invalid_argument &e) {
    throw IoError(e.what());
  }
  return data;
}

Dataset read_dataset_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open " + path);
  return read_dataset_csv(in);
}

void write_dataset_metadata(const std::string &path, const Dataset &data,
                            const HistoryFunction &history,
                            const SolveGrid &grid) {
  nlohmann::ordered_json meta;
  meta["seed"] = data.seed;
  meta["sigma"] = data.noise_sigma;
  meta["n_points"] = data.size();
  meta["noise"] = "mt19937_64 + Box-Muller, x draws then y draws";
  meta["truth"] = {{"alpha", data.truth.alpha},
                   {"beta", data.truth.beta},
                   {"tau", data.truth.tau},
                   {"vent_gain", data.truth.vent_gain},
                   {"vent_rate", data.truth.vent_rate},
                   {"vent_offset", data.truth.vent_offset}};
  if (history.kind() == HistoryFunction::Kind::Constant) {
    meta["history"] = {{"kind", "constant"},
                       {"x", history.constant_value().x},
                       {"y", history.constant_value().y}};
  } else {
    meta["history"] = {{"kind", "tabulated"},
                       {"nodes", history.times().size()}};
  }
  meta["grid"] = {{"t0", grid.t0},
                  {"t_end", grid.t_end},
                  {"steps_per_delay", grid.steps_per_delay}};

  std::ofstream out(path);
  if (!out)
    throw IoError("cannot open " + path + " for writing");
  out << meta.dump(2) << '\n';
  if (!out)
    throw IoError("failed writing " + path);
}

} // namespace respfit
