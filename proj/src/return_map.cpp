#include "dde/return_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dde/errors.hpp"
#include "dde/exact_solver.hpp"

namespace dde {

std::vector<std::pair<std::string, bool>> ConditionReport::flags() const {
  return {{"p1_gt_2", p1_gt_2},
          {"b_positive", b_positive},
          {"contraction", contraction},
          {"shape_window", shape_window},
          {"x3_positive", x3_positive}};
}

std::pair<double, double> map_slope_intercept(const Params& params) noexcept {
  const double a1 = params.a1();
  const double a2 = params.a2();
  const double p1 = params.p1();
  const double p2 = params.p2();
  const double m = 2.0 * a2 / a1 - 1.0;
  const double b = a1 * (p1 - 2.0) + a2 * (6.0 - (2.0 * p1 + p2));
  return {m, b};
}

MapCoeffs map_coefficients(const Params& params) {
  if (params.a1() == params.a2()) {
    throw DegenerateMap("a1 == a2: return map has slope 1 and no unique fixed point");
  }
  const auto [m, b] = map_slope_intercept(params);
  return {m, b, b / (1.0 - m)};
}

ShapeValues shape_values(const Params& params, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw InvalidArgument("shape values need h > 0");
  }
  const double a1 = params.a1();
  const double a2 = params.a2();
  const double p1 = params.p1();
  const auto [m, b] = map_slope_intercept(params);
  ShapeValues s{};
  s.h = h;
  s.t1 = h / a1;
  s.x1 = -h + a1 * p1 - 2.0 * a1;
  s.x2 = (a2 / a1 - 1.0) * h + a1 * p1 - 2.0 * a1 + 3.0 * a2 - a2 * p1;
  s.x3 = m * h + b;
  return s;
}

std::optional<HInterval> valid_h_interval(const Params& params) {
  const double a1 = params.a1();
  const auto [m, b] = map_slope_intercept(params);

  // p1 < t1 + 3  <=>  h > a1 (p1 - 3);  t1 + 2 <= p1  <=>  h <= a1 (p1 - 2)
  double lo = std::max(0.0, a1 * (params.p1() - 3.0));
  double hi = a1 * (params.p1() - 2.0);
  // t1 + 3 < T  <=>  h < a1 (T - 3); kept closed on the right with the
  // largest double below the bound.
  const double t_bound = a1 * (params.period() - 3.0);
  if (t_bound <= hi) {
    hi = std::nextafter(t_bound, -std::numeric_limits<double>::infinity());
  }
  // x3 = m h + b > 0
  if (m > 0.0) {
    lo = std::max(lo, -b / m);
  } else if (m < 0.0) {
    const double root = -b / m;
    if (root <= hi) {
      hi = std::nextafter(root, -std::numeric_limits<double>::infinity());
    }
  } else if (!(b > 0.0)) {
    return std::nullopt;
  }
  if (!(hi > lo)) {
    return std::nullopt;
  }
  return HInterval{lo, hi};
}

ConditionReport check_conditions(const Params& params) {
  ConditionReport r;
  const auto [m, b] = map_slope_intercept(params);
  r.p1_gt_2 = params.p1() > 2.0;
  r.b_positive = b > 0.0;
  r.contraction = params.a1() > params.a2();
  if (params.a1() != params.a2()) {
    const double h_star = b / (1.0 - m);
    if (h_star > 0.0) {
      const double t1 = h_star / params.a1();
      r.shape_window = t1 + 2.0 <= params.p1() && params.p1() < t1 + 3.0 && t1 + 3.0 < params.period();
      r.x3_positive = m * h_star + b > 0.0;
    }
  }
  r.overall = r.p1_gt_2 && r.b_positive && r.contraction && r.shape_window && r.x3_positive;
  return r;
}

std::vector<double> iterate_map(const Params& params, double h0, int n) {
  const auto [m, b] = map_slope_intercept(params);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  double h = h0;
  for (int k = 0; k < n; ++k) {
    h = m * h + b;
    out.push_back(h);
  }
  return out;
}

double empirical_map(const Params& params, double h) {
  const auto interval = valid_h_interval(params);
  if (!interval || !interval->contains(h)) {
    throw PreconditionError("h = " + std::to_string(h) + " is outside the interval where the return map is affine");
  }
  return solve_exact(params, h, params.period()).eval(params.period());
}

}  // namespace dde
