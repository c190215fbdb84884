#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "respfit/model.hpp"

namespace respfit {

/// Prescribed solution on [t0 - tau, t0]. Either a constant state or a table
/// of strictly increasing nodes, linearly interpolated.
class HistoryFunction {
public:
  enum class Kind { Constant, Tabulated };

  HistoryFunction() = default;

  static HistoryFunction constant(State value);
  /// Throws std::invalid_argument unless times are strictly increasing, sizes
  /// match and there are at least two nodes.
  static HistoryFunction tabulated(std::vector<double> times,
                                   std::vector<State> states);

  Kind kind() const noexcept { return kind_; }
  State eval(double t) const;

  /// True when the table covers [lo, hi]. Always true for Constant.
  bool covers(double lo, double hi) const;

  const State &constant_value() const noexcept { return value_; }
  const std::vector<double> &times() const noexcept { return times_; }
  const std::vector<State> &states() const noexcept { return states_; }

private:
  Kind kind_ = Kind::Constant;
  State value_{};
  std::vector<double> times_;
  std::vector<State> states_;
};

/// Where the delayed samples of a solve came from.
struct DelayLookupStats {
  std::size_t history = 0;       ///< t - tau <= t0
  std::size_t grid_node = 0;     ///< full-step samples read from nodes
  std::size_t hermite = 0;       ///< half-step samples interpolated
  std::size_t off_grid_full = 0; ///< full-step samples that missed a node
};

class Trajectory {
public:
  Trajectory(ModelParams params, HistoryFunction history, double t0,
             double step, int steps_per_delay, std::vector<State> states,
             std::vector<State> derivatives, DelayLookupStats stats);

  double t0() const noexcept { return t0_; }
  double t_end() const noexcept { return node_time(size() - 1); }
  double step() const noexcept { return step_; }
  double tau() const noexcept { return params_.tau; }
  int steps_per_delay() const noexcept { return steps_per_delay_; }
  std::size_t size() const noexcept { return states_.size(); }

  double node_time(std::size_t k) const noexcept {
    return t0_ + static_cast<double>(k) * step_;
  }
  const State &node(std::size_t k) const { return states_.at(k); }
  const State &node_derivative(std::size_t k) const {
    return derivatives_.at(k);
  }

  const std::vector<State> &states() const noexcept { return states_; }
  const HistoryFunction &history() const noexcept { return history_; }
  const ModelParams &params() const noexcept { return params_; }
  const DelayLookupStats &lookup_stats() const noexcept { return stats_; }

  /// History for t <= t0, node value on a node, cubic Hermite between nodes.
  /// Throws OutOfDomain outside [t0 - tau, t_end].
  State eval(double t) const;

private:
  ModelParams params_;
  HistoryFunction history_;
  double t0_;
  double step_;
  int steps_per_delay_;
  std::vector<State> states_;
  std::vector<State> derivatives_;
  DelayLookupStats stats_;
};

constexpr int kDefaultStepsPerDelay = 50;

/**
 * @brief Integrates the model on [t0, t_end] by the method of steps.
 *
 * Classical RK4 with h = tau / steps_per_delay. Since h divides tau, the
 * delayed arguments of the first and last stage are grid nodes (or history);
 * the two middle stages read t - tau + h/2 through cubic Hermite interpolation
 * with the stored node derivatives.
 *
 * Throws InvalidGrid when t_end - t0 is not a multiple of h or
 * steps_per_delay < 2, OutOfDomain when a tabulated history does not cover
 * [t0 - tau, t0], and NonFinite when the state overflows.
 */
Trajectory solve_dde(const ModelParams &params, const HistoryFunction &history,
                     double t0, double t_end,
                     int steps_per_delay = kDefaultStepsPerDelay);

inline State eval_trajectory(const Trajectory &traj, double t) {
  return traj.eval(t);
}

/// `t,x,y` per node, 17 significant digits.
void write_trajectory_csv(std::ostream &out, const Trajectory &traj);
void write_trajectory_csv(const std::string &path, const Trajectory &traj);

} // namespace respfit
