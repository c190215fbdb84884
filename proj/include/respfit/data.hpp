#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "respfit/dde.hpp"
#include "respfit/model.hpp"

namespace respfit {

/**
 * @brief Standard normal draws that do not depend on the standard library
 * vendor.
 *
 * std::mt19937_64 is bit-specified by the standard; std::normal_distribution
 * is not, so the transform is done here. Each pair of 64-bit words gives two
 * uniforms u = ((w >> 11) + 0.5) * 2^-53 in (0, 1), mapped by Box-Muller to
 * sqrt(-2 ln u1) cos(2 pi u2) and sqrt(-2 ln u1) sin(2 pi u2), returned in
 * that order.
 */
class GaussianSampler {
public:
  explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}

  double standard();
  double operator()(double sigma) { return sigma * standard(); }

private:
  double uniform_open();

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct Dataset {
  std::vector<double> times;
  std::vector<double> x_obs;
  std::vector<double> y_obs;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  ModelParams truth;

  std::size_t size() const noexcept { return times.size(); }

  /// Throws std::invalid_argument on length mismatch, M < 2, or times that
  /// are not strictly increasing.
  void validate() const;
};

/// Grid settings shared by data generation and fitting.
struct SolveGrid {
  double t0 = 0.0;
  double t_end = 5.0;
  int steps_per_delay = kDefaultStepsPerDelay;
};

/// n_points uniform times on [t0, t_end] (endpoints included).
std::vector<double> uniform_times(double t0, double t_end, int n_points);

/// X_i = x(t_i) + N(0, sigma), Y_i = y(t_i) + N(0, sigma). All x-noise is
/// drawn first in time order, then all y-noise.
Dataset generate_dataset(const ModelParams &params,
                         const HistoryFunction &history, const SolveGrid &grid,
                         int n_points, double sigma, std::uint64_t seed);

/// `t,x_obs,y_obs`, 17 significant digits.
void write_dataset_csv(std::ostream &out, const Dataset &data);
void write_dataset_csv(const std::string &path, const Dataset &data);

/// Reads observations only; sigma, seed and truth stay default.
Dataset read_dataset_csv(std::istream &in);
Dataset read_dataset_csv(const std::string &path);

/// JSON sidecar with seed, sigma, truth parameters, history and grid.
void write_dataset_metadata(const std::string &path, const Dataset &data,
                            const HistoryFunction &history,
                            const SolveGrid &grid);

} // namespace respfit
