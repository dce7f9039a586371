#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dde/model.hpp"
#include "dde/report.hpp"

namespace dde {

enum class Interpolation { Linear, Cubic };

struct IntegratorConfig {
  double step = 1e-3;  // must divide the delay 1 an integer number of times
  Interpolation interpolation = Interpolation::Cubic;
};

/// Throws InvalidArgument unless 1/step is a positive integer and, for
/// delta > 0, step <= delta / 4.
void validate(const IntegratorConfig& icfg, const SmoothingConfig& cfg);

/// Solution on the uniform grid t_k = -1 + k * step covering [-1, t_end],
/// with node derivatives for Hermite dense output.
class SampledTrajectory {
public:
  SampledTrajectory(int steps_per_delay, Interpolation interpolation, std::vector<double> values,
                    std::vector<double> slopes, double history_slope_at_zero);

  int steps_per_delay() const noexcept { return per_delay_; }
  double step() const noexcept { return 1.0 / per_delay_; }
  std::size_t size() const noexcept { return x_.size(); }
  double t_end() const noexcept { return time(x_.size() - 1); }

  double time(std::size_t node) const noexcept;
  std::span<const double> values() const noexcept { return x_; }

  /// Dense output. Throws InvalidArgument for t outside [-1, t_end].
  double eval(double t) const;

  /// Interpolant on [t_node, t_node + step] at fraction theta in [0, 1].
  double eval_in(std::size_t node, double theta) const noexcept;

private:
  int per_delay_;
  Interpolation interp_;
  std::vector<double> x_;
  std::vector<double> dx_;
  double history_slope_at_zero_;
};

/// Right-hand side g(t, x(t), x(t - 1)) of a scalar delay equation.
using DelayRhs = std::function<double(double t, double x, double x_delayed)>;

/// Method of steps with classical fourth-order Runge-Kutta on a grid aligned
/// with the delay; delayed stage values come from the dense output of the
/// previous delay interval.
SampledTrajectory integrate_dde(const DelayRhs& rhs, const History& history, const IntegratorConfig& icfg,
                                double horizon);

/// x'(t) = a_delta(t) f_delta(x(t - 1)).
SampledTrajectory integrate(const Params& params, const SmoothingConfig& cfg, const IntegratorConfig& icfg,
                            const History& history, double horizon);

/// x(T) from constant history h. delta == 0 is evaluated by the exact solver.
double poincare_map(const Params& params, const SmoothingConfig& cfg, const IntegratorConfig& icfg, double h);

struct FixedPointResult {
  double h_delta;
  double map_slope;
  int iterations;
  double residual;
};

struct FixedPointOptions {
  double bracket_fraction = 0.2;  // bracket h* (1 +- fraction)
  double tolerance = 1e-9;
  double slope_fraction = 1e-4;   // central-difference half-width relative to h*
};

/// Fixed point of the smoothed return map by bisection around the closed-form
/// fixed point. Throws PreconditionError if the closed-form conditions fail,
/// InvalidArgument if delta >= h*, BracketFailure if the bracket shows no
/// sign change.
FixedPointResult find_fixed_point(const Params& params, const SmoothingConfig& cfg, const IntegratorConfig& icfg,
                                  const FixedPointOptions& options = {});

/// Uniform distance over one period between the smoothed periodic orbit and
/// the exact one, sampled on the integrator grid.
double orbit_distance(const Params& params, const SmoothingConfig& cfg, const IntegratorConfig& icfg,
                      const FixedPointResult& fixed_point);
double orbit_distance(const Params& params, const SmoothingConfig& cfg, const IntegratorConfig& icfg);

/// Sign changes of the sampled solution on [t_from, t_end], located by linear
/// interpolation between nodes.
std::vector<double> sampled_zero_crossings(const SampledTrajectory& traj, double t_from = 0.0);

void write_samples_csv(std::ostream& os, const SampledTrajectory& traj, double step, double t_from = 0.0);

struct ConvergenceEntry {
  double delta;
  std::optional<FixedPointResult> fixed_point;
  std::optional<double> orbit_distance;
  std::string error;

  bool ok() const noexcept { return fixed_point.has_value() && orbit_distance.has_value(); }
};

struct ConvergenceReport {
  std::vector<ConvergenceEntry> entries;  // in the order of the requested deltas
  std::optional<double> fitted_k;         // least squares distance ~ K delta

  Json to_json() const;
};

/// Fixed point and orbit distance for every delta. Deltas run as independent
/// tasks on up to `jobs` threads; failures are recorded per entry.
ConvergenceReport convergence_study(const Params& params, std::span<const double> deltas,
                                    const IntegratorConfig& icfg, unsigned jobs = 1);

}  // namespace dde
