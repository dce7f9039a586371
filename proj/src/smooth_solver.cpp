#include "dde/smooth_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>

#include <boost/math/tools/roots.hpp>

#include "dde/errors.hpp"
#include "dde/exact_solver.hpp"
#include "dde/parallel.hpp"
#include "dde/return_map.hpp"

namespace dde {

namespace {

int steps_per_delay(double step) {
  if (!(step > 0.0) || !(step <= 1.0)) {
    throw InvalidArgument("integrator step must lie in (0, 1]");
  }
  const double n = std::round(1.0 / step);
  if (std::abs(n * step - 1.0) > 1e-9) {
    throw InvalidArgument("integrator step must divide the delay 1 an integer number of times");
  }
  return static_cast<int>(n);
}

double history_slope(const History& history, double s) {
  if (std::holds_alternative<ConstantHistory>(history)) {
    return 0.0;
  }
  constexpr double eps = 1e-6;
  const double lo = std::max(-1.0, s - eps);
  const double hi = std::min(0.0, s + eps);
  return (history_value(history, hi) - history_value(history, lo)) / (hi - lo);
}

double hermite(double x0, double x1, double d0, double d1, double h, double s) noexcept {
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * x0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * x1 + (s3 - s2) * h * d1;
}

}  // namespace

void validate(const IntegratorConfig& icfg, const SmoothingConfig& cfg) {
  steps_per_delay(icfg.step);
  if (cfg.delta > 0.0 && icfg.step > cfg.delta / 4.0 * (1.0 + 1e-12)) {
    throw InvalidArgument("integrator step must not exceed delta / 4");
  }
}

SampledTrajectory::SampledTrajectory(int steps_per_delay, Interpolation interpolation, std::vector<double> values,
                                     std::vector<double> slopes, double history_slope_at_zero)
    : per_delay_(steps_per_delay),
      interp_(interpolation),
      x_(std::move(values)),
      dx_(std::move(slopes)),
      history_slope_at_zero_(history_slope_at_zero) {
  if (x_.size() < 2 || x_.size() != dx_.size()) {
    throw InvalidArgument("sampled trajectory needs matching value and slope arrays");
  }
}

double SampledTrajectory::time(std::size_t node) const noexcept {
  return (static_cast<double>(node) - per_delay_) / per_delay_;
}

double SampledTrajectory::eval_in(std::size_t node, double theta) const noexcept {
  const double x0 = x_[node];
  const double x1 = x_[node + 1];
  if (interp_ == Interpolation::Linear) {
    return x0 + theta * (x1 - x0);
  }
  // Node 0 of the solution has a one-sided derivative from the history.
  const double d1 = node + 1 == static_cast<std::size_t>(per_delay_) ? history_slope_at_zero_ : dx_[node + 1];
  return hermite(x0, x1, dx_[node], d1, step(), theta);
}

double SampledTrajectory::eval(double t) const {
  if (!(t >= -1.0 && t <= t_end())) {
    throw InvalidArgument("evaluation time " + std::to_string(t) + " outside the sampled range");
  }
  const double pos = (t + 1.0) * per_delay_;
  auto node = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
  node = std::min(node, x_.size() - 2);
  return eval_in(node, pos - static_cast<double>(node));
}

SampledTrajectory integrate_dde(const DelayRhs& rhs, const History& history, const IntegratorConfig& icfg,
                                double horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw InvalidArgument("horizon must be positive and finite");
  }
  const int n = steps_per_delay(icfg.step);
  const auto un = static_cast<std::size_t>(n);
  const double h = 1.0 / n;
  const auto steps = static_cast<std::size_t>(std::ceil(horizon * n - 1e-9));
  const std::size_t total = un + 1 + steps;

  std::vector<double> x(total);
  std::vector<double> dx(total);
  for (std::size_t i = 0; i <= un; ++i) {
    const double s = (static_cast<double>(i) - n) / n;
    x[i] = history_value(history, s);
    dx[i] = history_slope(history, s);
  }
  const double history_slope_at_zero = dx[un];

  // Value at the midpoint of [t_j, t_j + h], from data already computed.
  auto delayed_midpoint = [&](std::size_t j) {
    if (icfg.interpolation == Interpolation::Linear) {
      return 0.5 * (x[j] + x[j + 1]);
    }
    const double d1 = j + 1 == un ? history_slope_at_zero : dx[j + 1];
    return hermite(x[j], x[j + 1], dx[j], d1, h, 0.5);
  };

  dx[un] = rhs(0.0, x[un], x[0]);
  for (std::size_t i = un; i + 1 < total; ++i) {
    const std::size_t j = i - un;
    const double t = (static_cast<double>(i) - n) / n;
    const double t_next = (static_cast<double>(i + 1) - n) / n;
    const double xd_mid = delayed_midpoint(j);

    const double k1 = dx[i];
    const double k2 = rhs(t + 0.5 * h, x[i] + 0.5 * h * k1, xd_mid);
    const double k3 = rhs(t + 0.5 * h, x[i] + 0.5 * h * k2, xd_mid);
    const double k4 = rhs(t_next, x[i] + h * k3, x[j + 1]);
    x[i + 1] = x[i] + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    dx[i + 1] = rhs(t_next, x[i + 1], x[j + 1]);
  }
  return SampledTrajectory(n, icfg.interpolation, std::move(x), std::move(dx), history_slope_at_zero);
}

SampledTrajectory integrate(const Params& params, const SmoothingConfig& cfg, const IntegratorConfig& icfg,
                            const History& history, double horizon) {
  const Model model(params, cfg);
  validate(icfg, cfg);
  const DelayRhs rhs = [&model](double t, double, double x_delayed) {
    return model.coefficient(t) * model.feedback(x_delayed);
  };
  return integrate_dde(rhs, history, icfg, horizon);
}

double poincare_map(const Params& params, const SmoothingConfig& cfg, const IntegratorConfig& icfg, double h) {
  const double period = params.period();
  if (cfg.delta == 0.0) {
    validate(params, cfg);
    return solve_exact(params, h, period).eval(period);
  }
  return integrate(params, cfg, icfg, ConstantHistory{h}, period).eval(period);
}

FixedPointResult find_fixed_point(const Params& params, const SmoothingConfig& cfg, const IntegratorConfig& icfg,
                                  const FixedPointOptions& options) {
  if (!check_conditions(params).overall) {
    throw PreconditionError("parameters do not admit the closed-form stable periodic orbit");
  }
  const MapCoeffs coeffs = map_coefficients(params);
  const double h_star = coeffs.h_star;
  validate(params, cfg);
  if (!(cfg.delta < h_star)) {
    throw InvalidArgument("smoothing delta must be smaller than the fixed point h*");
  }

  auto residual_at = [&](double h) { return poincare_map(params, cfg, icfg, h) - h; };

  if (cfg.delta == 0.0) {
    return {h_star, coeffs.m, 0, std::abs(residual_at(h_star))};
  }
  validate(icfg, cfg);

  const double radius = options.bracket_fraction * h_star;
  const double lo = h_star - radius;
  const double hi = h_star + radius;
  const double g_lo = residual_at(lo);
  const double g_hi = residual_at(hi);
  if (g_lo == 0.0 || g_hi == 0.0) {
    const double root = g_lo == 0.0 ? lo : hi;
    const double eps = options.slope_fraction * h_star;
    const double slope = (poincare_map(params, cfg, icfg, root + eps) - poincare_map(params, cfg, icfg, root - eps)) /
                         (2.0 * eps);
    return {root, slope, 0, 0.0};
  }
  if ((g_lo > 0.0) == (g_hi > 0.0)) {
    throw BracketFailure("no sign change of P(h) - h on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }

  std::uintmax_t max_iter = 200;
  const auto bracket = boost::math::tools::bisect(
      residual_at, lo, hi,
      [&](double a, double b) { return std::abs(b - a) <= 4 * std::numeric_limits<double>::epsilon() * h_star; },
      max_iter);
  double root = 0.5 * (bracket.first + bracket.second);
  double residual = std::abs(residual_at(root));
  for (double end : {bracket.first, bracket.second}) {
    const double r = std::abs(residual_at(end));
    if (r < residual) {
      residual = r;
      root = end;
    }
  }

  const double eps = options.slope_fraction * h_star;
  const double slope =
      (poincare_map(params, cfg, icfg, root + eps) - poincare_map(params, cfg, icfg, root - eps)) / (2.0 * eps);
  return {root, slope, static_cast<int>(max_iter), residual};
}

double orbit_distance(const Params& params, const SmoothingConfig& cfg, const IntegratorConfig& icfg,
                      const FixedPointResult& fixed_point) {
  const double period = params.period();
  const MapCoeffs coeffs = map_coefficients(params);
  const Trajectory exact = solve_exact(params, coeffs.h_star, period);
  if (cfg.delta == 0.0) {
    // Routed to the exact solver: both orbits come from the same solve.
    const Trajectory routed = solve_exact(params, fixed_point.h_delta, period);
    double worst = 0.0;
    for (const AffineSegment& s : exact.segments()) {
      worst = std::max({worst, std::abs(routed.eval(s.t_start) - s.x_start),
                        std::abs(routed.eval(s.t_end) - s.x_end())});
    }
    return worst;
  }
  const SampledTrajectory smooth = integrate(params, cfg, icfg, ConstantHistory{fixed_point.h_delta}, period);
  double worst = 0.0;
  for (std::size_t node = static_cast<std::size_t>(smooth.steps_per_delay()); node < smooth.size(); ++node) {
    const double t = smooth.time(node);
    if (t > period) {
      break;
    }
    worst = std::max(worst, std::abs(smooth.values()[node] - exact.eval(t)));
  }
  return std::max(worst, std::abs(smooth.eval(period) - exact.eval(period)));
}

double orbit_distance(const Params& params, const SmoothingConfig& cfg, const IntegratorConfig& icfg) {
  return orbit_distance(params, cfg, icfg, find_fixed_point(params, cfg, icfg));
}

std::vector<double> sampled_zero_crossings(const SampledTrajectory& traj, double t_from) {
  std::vector<double> zeros;
  const auto xs = traj.values();
  int last_sign = 0;
  std::size_t last_node = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (traj.time(i) < t_from) {
      continue;
    }
    const int sign = (xs[i] > 0.0) - (xs[i] < 0.0);
    if (sign == 0) {
      continue;
    }
    if (last_sign != 0 && sign != last_sign) {
      const double t0 = traj.time(last_node);
      const double t1 = traj.time(i);
      const double x0 = xs[last_node];
      const double x1 = xs[i];
      zeros.push_back(t0 + (t1 - t0) * x0 / (x0 - x1));
    }
    last_sign = sign;
    last_node = i;
  }
  return zeros;
}

void write_samples_csv(std::ostream& os, const SampledTrajectory& traj, double step, double t_from) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw InvalidArgument("sample step must be positive");
  }
  os << "t,x\n";
  const double t_end = traj.t_end();
  const auto count = static_cast<std::size_t>(std::floor((t_end - t_from) / step + 1e-9));
  for (std::size_t k = 0; k <= count; ++k) {
    const double t = std::min(t_from + static_cast<double>(k) * step, t_end);
    os << format_number(t) << ',' << format_number(traj.eval(t)) << '\n';
  }
}

Json ConvergenceReport::to_json() const {
  Json deltas = Json::array();
  Json h = Json::array();
  Json slope = Json::array();
  Json distance = Json::array();
  Json residual = Json::array();
  Json errors = Json::array();
  for (const ConvergenceEntry& e : entries) {
    deltas.push_back(json_number(e.delta));
    h.push_back(e.fixed_point ? json_number(e.fixed_point->h_delta) : Json(nullptr));
    slope.push_back(e.fixed_point ? json_number(e.fixed_point->map_slope) : Json(nullptr));
    residual.push_back(e.fixed_point ? json_number(e.fixed_point->residual) : Json(nullptr));
    distance.push_back(e.orbit_distance ? json_number(*e.orbit_distance) : Json(nullptr));
    errors.push_back(e.error.empty() ? Json(nullptr) : Json(e.error));
  }
  Json j;
  j["delta"] = deltas;
  j["h_delta"] = h;
  j["slope"] = slope;
  j["orbit_distance"] = distance;
  j["fitted_K"] = fitted_k ? json_number(*fitted_k) : Json(nullptr);
  j["residual"] = residual;
  j["error"] = errors;
  return j;
}

ConvergenceReport convergence_study(const Params& params, std::span<const double> deltas,
                                    const IntegratorConfig& icfg, unsigned jobs) {
  ConvergenceReport report;
  report.entries.resize(deltas.size());
  parallel_for(deltas.size(), jobs, [&](std::size_t i) {
    ConvergenceEntry& e = report.entries[i];
    e.delta = deltas[i];
    try {
      const SmoothingConfig cfg{deltas[i]};
      e.fixed_point = find_fixed_point(params, cfg, icfg);
      e.orbit_distance = orbit_distance(params, cfg, icfg, *e.fixed_point);
    } catch (const Error& err) {
      e.fixed_point.reset();
      e.orbit_distance.reset();
      e.error = err.what();
    }
  });

  double num = 0.0;
  double den = 0.0;
  for (const ConvergenceEntry& e : report.entries) {
    if (e.ok() && e.delta > 0.0) {
      num += *e.orbit_distance * e.delta;
      den += e.delta * e.delta;
    }
  }
  if (den > 0.0) {
    report.fitted_k = num / den;
  }
  return report;
}

}  // namespace dde
