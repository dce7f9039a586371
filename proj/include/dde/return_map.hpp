#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dde/model.hpp"

namespace dde {

/// Affine return map h -> m h + b from constant history h to x(T).
struct MapCoeffs {
  double m;
  double b;
  double h_star;
};

/// Landmarks of one period of the solution from constant history h:
/// first zero t1, x1 = x(p1), x2 = x(t1 + 3), x3 = x(T).
struct ShapeValues {
  double h;
  double t1;
  double x1;
  double x2;
  double x3;
};

struct ConditionReport {
  bool p1_gt_2 = false;
  bool b_positive = false;
  bool contraction = false;   // a1 > a2, equivalently |m| < 1
  bool shape_window = false;  // t1 + 2 <= p1 and p1 < t1 + 3 < T at h_star
  bool x3_positive = false;   // x3 > 0 at h_star
  bool overall = false;

  /// Flag names and values in a fixed order.
  std::vector<std::pair<std::string, bool>> flags() const;
};

/// Open-left, closed-right interval (lo, hi].
struct HInterval {
  double lo;
  double hi;

  bool contains(double h) const noexcept { return h > lo && h <= hi; }
};

/// Slope and intercept of the return map, always defined.
std::pair<double, double> map_slope_intercept(const Params& params) noexcept;

/// Throws DegenerateMap when a1 == a2.
MapCoeffs map_coefficients(const Params& params);

ShapeValues shape_values(const Params& params, double h);

/// Initial values h > 0 for which the solution has the single-period shape
/// the closed form describes. Empty when the constraints are inconsistent.
std::optional<HInterval> valid_h_interval(const Params& params);

ConditionReport check_conditions(const Params& params);

/// h_1 .. h_n of h_{k+1} = m h_k + b (h0 itself is not included).
std::vector<double> iterate_map(const Params& params, double h0, int n);

/// x(T) of the exact solution from constant history h. Throws
/// PreconditionError unless h lies in valid_h_interval(params).
double empirical_map(const Params& params, double h);

}  // namespace dde
