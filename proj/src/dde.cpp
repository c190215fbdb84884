#include "respfit/dde.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

#include "respfit/errors.hpp"

namespace respfit {

namespace {

State axpy(const State &y, double a, const State &k) {
  return {y.x + a * k.x, y.y + a * k.y};
}

bool finite(const State &s) { return std::isfinite(s.x) && std::isfinite(s.y); }

State hermite(const State &y0, const State &d0, const State &y1,
              const State &d1, double h, double s) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return {h00 * y0.x + h10 * h * d0.x + h01 * y1.x + h11 * h * d1.x,
          h00 * y0.y + h10 * h * d0.y + h01 * y1.y + h11 * h * d1.y};
}

} // namespace

HistoryFunction HistoryFunction::constant(State value) {
  HistoryFunction h;
  h.kind_ = Kind::Constant;
  h.value_ = value;
  return h;
}

HistoryFunction HistoryFunction::tabulated(std::vector<double> times,
                                           std::vector<State> states) {
  if (times.size() != states.size() || times.size() < 2)
    throw std::invalid_argument(
        "tabulated history needs >= 2 nodes with matching sizes");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument(
          "tabulated history times must be strictly increasing");
  HistoryFunction h;
  h.kind_ = Kind::Tabulated;
  h.times_ = std::move(times);
  h.states_ = std::move(states);
  return h;
}

bool HistoryFunction::covers(double lo, double hi) const {
  if (kind_ == Kind::Constant)
    return true;
  const double slack = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  return times_.front() <= lo + slack && times_.back() >= hi - slack;
}

State HistoryFunction::eval(double t) const {
  if (kind_ == Kind::Constant)
    return value_;
  if (t <= times_.front())
    return states_.front();
  if (t >= times_.back())
    return states_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto i = static_cast<std::size_t>(it - times_.begin());
  const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
  const State &a = states_[i - 1];
  const State &b = states_[i];
  return {a.x + w * (b.x - a.x), a.y + w * (b.y - a.y)};
}

Trajectory::Trajectory(ModelParams params, HistoryFunction history, double t0,
                       double step, int steps_per_delay,
                       std::vector<State> states,
                       std::vector<State> derivatives, DelayLookupStats stats)
    : params_(params), history_(std::move(history)), t0_(t0), step_(step),
      steps_per_delay_(steps_per_delay), states_(std::move(states)),
      derivatives_(std::move(derivatives)), stats_(stats) {
  if (states_.size() < 2 || states_.size() != derivatives_.size())
    throw std::invalid_argument("Trajectory: inconsistent node storage");
}

State Trajectory::eval(double t) const {
  const double lo = t0_ - params_.tau;
  const double hi = t_end();
  const double slack = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  if (!(t >= lo - slack && t <= hi + slack))
    throw OutOfDomain("trajectory evaluated at t=" + std::to_string(t) +
                      " outside [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  if (t <= t0_)
    return history_.eval(t);

  const double s = (t - t0_) / step_;
  const auto last = static_cast<long>(size()) - 1;
  const long nearest = std::clamp(std::lround(s), 0L, last);
  if (node_time(static_cast<std::size_t>(nearest)) == t)
    return states_[static_cast<std::size_t>(nearest)];

  const long j = std::clamp(static_cast<long>(std::floor(s)), 0L, last - 1);
  const auto ju = static_cast<std::size_t>(j);
  const double local = std::clamp(s - static_cast<double>(j), 0.0, 1.0);
  return hermite(states_[ju], derivatives_[ju], states_[ju + 1],
                 derivatives_[ju + 1], step_, local);
}

Trajectory solve_dde(const ModelParams &params, const HistoryFunction &history,
                     double t0, double t_end, int steps_per_delay) {
  params.validate_structure();
  if (steps_per_delay < 2)
    throw InvalidGrid("steps_per_delay must be >= 2");
  if (!(std::isfinite(t0) && std::isfinite(t_end) && t_end > t0))
    throw InvalidGrid("integration interval must satisfy t_end > t0");

  const int lag = steps_per_delay;
  const double h = params.tau / lag;
  const double steps_real = (t_end - t0) / h;
  const double steps_rounded = std::round(steps_real);
  if (steps_rounded < 1.0 ||
      std::abs(steps_real - steps_rounded) > 1e-9 * std::max(1.0, steps_rounded))
    throw InvalidGrid("t_end - t0 = " + std::to_string(t_end - t0) +
                      " is not a multiple of the step " + std::to_string(h));
  if (!history.covers(t0 - params.tau, t0))
    throw OutOfDomain("tabulated history does not cover [t0 - tau, t0]");

  const auto n_steps = static_cast<std::size_t>(steps_rounded);
  std::vector<State> ys(n_steps + 1);
  std::vector<State> ds(n_steps + 1);
  DelayLookupStats stats;

  auto node_time = [&](long k) { return t0 + static_cast<double>(k) * h; };

  // Delayed state at node k's time minus tau.
  auto delayed_full = [&](std::size_t k) -> State {
    const long j = static_cast<long>(k) - lag;
    if (j < 0) {
      ++stats.history;
      return history.eval(node_time(j));
    }
    const double want = node_time(static_cast<long>(k)) - params.tau;
    if (std::abs(node_time(j) - want) > 1e-9 * std::max(1.0, std::abs(want)))
      ++stats.off_grid_full;
    ++stats.grid_node;
    return ys[static_cast<std::size_t>(j)];
  };

  // Delayed state at the midpoint of step n minus tau.
  auto delayed_half = [&](std::size_t n) -> State {
    const long j = static_cast<long>(n) - lag;
    if (j < 0) {
      ++stats.history;
      return history.eval(node_time(j) + 0.5 * h);
    }
    ++stats.hermite;
    const auto ju = static_cast<std::size_t>(j);
    return hermite(ys[ju], ds[ju], ys[ju + 1], ds[ju + 1], h, 0.5);
  };

  ys[0] = history.eval(t0);
  ds[0] = rhs(ys[0], delayed_full(0), params);

  for (std::size_t n = 0; n < n_steps; ++n) {
    const State &y = ys[n];
    const State lag_mid = delayed_half(n);
    const State lag_next = delayed_full(n + 1);

    const State k1 = ds[n];
    const State k2 = rhs(axpy(y, 0.5 * h, k1), lag_mid, params);
    const State k3 = rhs(axpy(y, 0.5 * h, k2), lag_mid, params);
    const State k4 = rhs(axpy(y, h, k3), lag_next, params);

    ys[n + 1] = {y.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
                 y.y + h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y)};
    ds[n + 1] = rhs(ys[n + 1], lag_next, params);
    if (!finite(ys[n + 1]) || !finite(ds[n + 1]))
      throw NonFinite("state overflowed at t=" +
                      std::to_string(node_time(static_cast<long>(n) + 1)));
  }

  return Trajectory(params, history, t0, h, lag, std::move(ys), std::move(ds),
                    stats);
}

void write_trajectory_csv(std::ostream &out, const Trajectory &traj) {
  const auto old_precision = out.precision(17);
  out << "t,x,y\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const State &s = traj.node(k);
    out << traj.node_time(k) << ',' << s.x << ',' << s.y << '\n';
  }
  out.precision(old_precision);
}

void write_trajectory_csv(const std::string &path, const Trajectory &traj) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot open " + path + " for writing");
  write_trajectory_csv(out, traj);
  if (!out)
    throw IoError("failed writing " + path);
}

} // namespace respfit
