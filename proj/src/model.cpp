#include "dde/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>

#include "dde/errors.hpp"

namespace dde {

namespace {

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw InvalidArgument(std::string(name) + " must be positive and finite, got " + std::to_string(v));
  }
}

void validate_delta(double delta) {
  if (!std::isfinite(delta) || delta < 0.0) {
    throw InvalidArgument("smoothing delta must be a nonnegative finite number, got " + std::to_string(delta));
  }
}

// -sign(x) for delta == 0, otherwise the affine ramp of slope -1/delta.
double ramp_feedback(double delta, double x) noexcept {
  if (delta == 0.0) {
    return x > 0.0 ? -1.0 : (x < 0.0 ? 1.0 : 0.0);
  }
  if (x <= -delta) {
    return 1.0;
  }
  if (x >= delta) {
    return -1.0;
  }
  return -x / delta;
}

}  // namespace

Params::Params(double a1, double a2, double p1, double p2) : a1_(a1), a2_(a2), p1_(p1), p2_(p2) {
  require_positive(a1, "a1");
  require_positive(a2, "a2");
  require_positive(p1, "p1");
  require_positive(p2, "p2");
  if (!(p1 + p2 > 1.0)) {
    throw InvalidArgument("period p1 + p2 must exceed the delay 1, got " + std::to_string(p1 + p2));
  }
}

void validate(const Params& params, const SmoothingConfig& cfg) {
  validate_delta(cfg.delta);
  if (!(2.0 * cfg.delta < std::min(params.p1(), params.p2()))) {
    throw InvalidArgument("smoothing ramps overlap: need 2*delta < min(p1, p2)");
  }
}

double history_value(const History& history, double s) {
  return std::visit(
      [s](const auto& h) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(h)>, ConstantHistory>) {
          return h.h;
        } else {
          return h.phi(s);
        }
      },
      history);
}

Model::Model(Params params, SmoothingConfig cfg) : params_(params), delta_(cfg.delta) {
  validate(params_, cfg);
}

double Model::reduce(double t) const noexcept {
  const double period = params_.period();
  double r = t - std::floor(t / period) * period;
  // t just below a multiple of T can round up to exactly T.
  if (r >= period || r < 0.0) {
    r = 0.0;
  }
  return r;
}

double Model::coefficient(double t) const noexcept {
  const double a1 = params_.a1();
  const double a2 = params_.a2();
  const double p1 = params_.p1();
  const double period = params_.period();
  const double r = reduce(t);

  if (delta_ == 0.0) {
    return r < p1 ? a1 : a2;
  }

  const double d = delta_;
  const double rise = (a1 - a2) / (2.0 * d);
  if (r < d) {
    return a2 + rise * (r + d);
  }
  if (r < p1 - d) {
    return a1;
  }
  if (r <= p1 + d) {
    return a1 - rise * (r - (p1 - d));
  }
  if (r < period - d) {
    return a2;
  }
  return a2 + rise * (r - (period - d));
}

double Model::feedback(double x) const noexcept { return ramp_feedback(delta_, x); }

double eval_coefficient(const Params& params, const SmoothingConfig& cfg, double t) {
  return Model(params, cfg).coefficient(t);
}

double eval_feedback(const SmoothingConfig& cfg, double x) {
  validate_delta(cfg.delta);
  return ramp_feedback(cfg.delta, x);
}

}  // namespace dde
