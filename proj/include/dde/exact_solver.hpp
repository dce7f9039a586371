#pragma once

#include <cstddef>
#include <iosfwd>
#include <queue>
#include <span>
#include <vector>

#include "dde/model.hpp"

namespace dde {

/// x(t) = x_start + slope * (t - t_start) on [t_start, t_end].
struct AffineSegment {
  double t_start;
  double t_end;
  double x_start;
  double slope;

  double x_end() const noexcept { return x_start + slope * (t_end - t_start); }
  double at(double t) const noexcept { return x_start + slope * (t - t_start); }
};

/// Exact continuous piecewise-affine solution on [0, horizon] for a constant
/// initial history.
class Trajectory {
public:
  Trajectory(Params params, double history, std::vector<AffineSegment> segments);

  const Params& params() const noexcept { return params_; }
  double history() const noexcept { return history_; }
  double horizon() const noexcept { return segments_.back().t_end; }
  std::span<const AffineSegment> segments() const noexcept { return segments_; }

  /// Throws InvalidArgument for t outside [0, horizon].
  double eval(double t) const;

  /// Value at t, taking the history value for t in [-1, 0).
  double eval_with_history(double t) const;

  /// The segment whose half-open span [t_start, t_end) contains t; the last
  /// segment for t == horizon.
  const AffineSegment& segment_at(double t) const;

private:
  Params params_;
  double history_;
  std::vector<AffineSegment> segments_;
};

enum class EventKind { CoefficientSwitch, DelayedZero };

struct Event {
  double time;
  EventKind kind;
};

/// Pending breakpoints ordered by time. Events closer than the coincidence
/// tolerance are drained together.
class EventQueue {
public:
  static constexpr double kCoincidence = 1e-12;

  void push(Event e);
  bool empty() const noexcept { return heap_.empty(); }
  double next_time() const;

  /// Removes every event with time <= t + kCoincidence.
  std::vector<Event> pop_through(double t);

  std::size_t pushed() const noexcept { return pushed_; }

private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept { return a.time > b.time; }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::size_t pushed_ = 0;
};

struct ExactSolverOptions {
  std::size_t max_events = 1'000'000;
};

/// Solves x'(t) = a0(t) f0(x(t - 1)) forward from the constant history h on
/// [0, horizon]. The right-hand side is constant between coefficient
/// switches and delayed zeros, so each segment is exact.
Trajectory solve_exact(const Params& params, double h, double horizon, ExactSolverOptions options = {});

/// General histories of one sign reduce to their value at 0; histories that
/// vanish somewhere on [-1, 0] are rejected.
Trajectory solve_exact(const Params& params, const History& history, double horizon,
                       ExactSolverOptions options = {});

/// Sign-changing zeros of the trajectory, strictly increasing.
std::vector<double> zero_crossings(const Trajectory& traj);

/// True iff consecutive zeros are more than `delay` apart.
bool is_slowly_oscillating(std::span<const double> zeros, double delay = 1.0);

void write_segments_csv(std::ostream& os, const Trajectory& traj);

/// Samples at t = k * step, plus the horizon when it is off the grid.
void write_samples_csv(std::ostream& os, const Trajectory& traj, double step);

}  // namespace dde
