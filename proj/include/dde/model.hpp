#pragma once

#include <functional>
#include <variant>

namespace dde {

/// Periodic coefficient data: a(t) = a1 on [0, p1), a2 on [p1, p1 + p2),
/// extended with period T = p1 + p2. The delay is normalized to 1.
class Params {
public:
  /// Throws InvalidArgument unless all four values are positive and finite
  /// and T > 1.
  Params(double a1, double a2, double p1, double p2);

  double a1() const noexcept { return a1_; }
  double a2() const noexcept { return a2_; }
  double p1() const noexcept { return p1_; }
  double p2() const noexcept { return p2_; }
  double period() const noexcept { return p1_ + p2_; }

  friend bool operator==(const Params&, const Params&) = default;

private:
  double a1_;
  double a2_;
  double p1_;
  double p2_;
};

/// Half-width of the affine ramps replacing each jump of f and a.
/// delta == 0 selects the discontinuous originals.
struct SmoothingConfig {
  double delta = 0.0;
};

/// Throws InvalidArgument if delta < 0, not finite, or the ramps of the
/// coefficient overlap (2 delta >= min(p1, p2)).
void validate(const Params& params, const SmoothingConfig& cfg);

/// Initial function on [-1, 0].
struct ConstantHistory {
  double h;
};

struct FunctionHistory {
  std::function<double(double)> phi;
};

using History = std::variant<ConstantHistory, FunctionHistory>;

double history_value(const History& history, double s);

/// Coefficient and feedback of x'(t) = a(t) f(x(t - 1)) for one parameter
/// set and smoothing width. Validated once at construction.
class Model {
public:
  Model(Params params, SmoothingConfig cfg);

  const Params& params() const noexcept { return params_; }
  double delta() const noexcept { return delta_; }

  double coefficient(double t) const noexcept;
  double feedback(double x) const noexcept;

  /// Reduces t into [0, T) with one floored division.
  double reduce(double t) const noexcept;

private:
  Params params_;
  double delta_;
};

double eval_coefficient(const Params& params, const SmoothingConfig& cfg, double t);
double eval_feedback(const SmoothingConfig& cfg, double x);

}  // namespace dde
