#include "dde/exact_solver.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>

#include "dde/errors.hpp"
#include "dde/report.hpp"

namespace dde {

namespace {

int sign_of(double v) noexcept { return (v > 0.0) - (v < 0.0); }

// Zero of the segment at which x leaves the sign `last_sign` for the opposite
// one. A segment ending exactly at zero is not a crossing yet; the next
// segment decides between crossing and touch.
std::optional<double> crossing(const AffineSegment& seg, int last_sign) {
  if (sign_of(seg.x_end()) != -last_sign) {
    return std::nullopt;
  }
  if (seg.x_start == 0.0) {
    return seg.t_start;
  }
  const double z = seg.t_start - seg.x_start / seg.slope;
  return std::clamp(z, seg.t_start, seg.t_end);
}

}  // namespace

Trajectory::Trajectory(Params params, double history, std::vector<AffineSegment> segments)
    : params_(params), history_(history), segments_(std::move(segments)) {
  if (segments_.empty()) {
    throw InvalidArgument("trajectory needs at least one segment");
  }
}

const AffineSegment& Trajectory::segment_at(double t) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double v, const AffineSegment& s) { return v < s.t_start; });
  if (it == segments_.begin()) {
    return segments_.front();
  }
  return *std::prev(it);
}

double Trajectory::eval(double t) const {
  if (!(t >= 0.0 && t <= horizon())) {
    throw InvalidArgument("evaluation time " + std::to_string(t) + " outside [0, horizon]");
  }
  return segment_at(t).at(t);
}

double Trajectory::eval_with_history(double t) const {
  if (t < 0.0 && t >= -1.0) {
    return history_;
  }
  return eval(t);
}

void EventQueue::push(Event e) {
  heap_.push(e);
  ++pushed_;
}

double EventQueue::next_time() const {
  if (heap_.empty()) {
    throw RunawayError("event queue is empty");
  }
  return heap_.top().time;
}

std::vector<Event> EventQueue::pop_through(double t) {
  std::vector<Event> out;
  while (!heap_.empty() && heap_.top().time <= t + kCoincidence) {
    out.push_back(heap_.top());
    heap_.pop();
  }
  return out;
}

Trajectory solve_exact(const Params& params, double h, double horizon, ExactSolverOptions options) {
  if (!std::isfinite(h) || h == 0.0) {
    throw InvalidArgument("initial value h must be finite and nonzero");
  }
  if (!std::isfinite(horizon) || horizon <= 0.0) {
    throw InvalidArgument("horizon must be positive and finite");
  }

  const Model model(params, SmoothingConfig{0.0});
  const double period = params.period();

  EventQueue queue;
  for (std::size_t k = 0;; ++k) {
    const double base = static_cast<double>(k) * period;
    if (base > horizon) {
      break;
    }
    if (k > 0) {
      queue.push({base, EventKind::CoefficientSwitch});
    }
    if (base + params.p1() <= horizon) {
      queue.push({base + params.p1(), EventKind::CoefficientSwitch});
    }
    if (queue.pushed() > options.max_events) {
      throw RunawayError("coefficient switches exceed the event cap");
    }
  }

  std::vector<AffineSegment> segments;
  double t = 0.0;
  double x = h;
  int delayed_sign = sign_of(h);  // sign of x(t - 1) on the current segment
  int last_sign = sign_of(h);     // last nonzero sign taken by x

  while (t < horizon) {
    auto segment_end = [&] { return queue.empty() ? horizon : std::min(queue.next_time(), horizon); };

    AffineSegment seg{t, segment_end(), x, 0.0};
    seg.slope = model.coefficient(0.5 * (seg.t_start + seg.t_end)) * -static_cast<double>(delayed_sign);
    if (seg.slope == 0.0) {
      throw RunawayError("zero slope segment at t = " + std::to_string(t));
    }

    if (auto z = crossing(seg, last_sign)) {
      last_sign = -last_sign;
      if (*z + 1.0 <= horizon) {
        queue.push({*z + 1.0, EventKind::DelayedZero});
        seg.t_end = segment_end();
      }
    }

    segments.push_back(seg);
    x = seg.x_end();
    t = seg.t_end;

    for (const Event& e : queue.pop_through(t)) {
      if (e.kind == EventKind::DelayedZero) {
        delayed_sign = -delayed_sign;
      }
    }
    if (queue.pushed() > options.max_events) {
      throw RunawayError("event count exceeded the cap of " + std::to_string(options.max_events));
    }
  }

  return Trajectory(params, h, std::move(segments));
}

Trajectory solve_exact(const Params& params, const History& history, double horizon, ExactSolverOptions options) {
  if (const auto* c = std::get_if<ConstantHistory>(&history)) {
    return solve_exact(params, c->h, horizon, options);
  }
  // Forward dynamics only see the sign of the history, so a one-signed
  // history is equivalent to the constant phi(0).
  const double at_zero = history_value(history, 0.0);
  const int sign = sign_of(at_zero);
  constexpr int kSamples = 1000;
  for (int i = 0; i <= kSamples; ++i) {
    const double s = -1.0 + static_cast<double>(i) / kSamples;
    if (sign == 0 || sign_of(history_value(history, s)) != sign) {
      throw InvalidArgument("history must keep one strict sign on [-1, 0]");
    }
  }
  return solve_exact(params, at_zero, horizon, options);
}

std::vector<double> zero_crossings(const Trajectory& traj) {
  std::vector<double> zeros;
  int last_sign = sign_of(traj.history());
  for (const AffineSegment& seg : traj.segments()) {
    if (auto z = crossing(seg, last_sign)) {
      zeros.push_back(*z);
      last_sign = -last_sign;
    }
  }
  return zeros;
}

bool is_slowly_oscillating(std::span<const double> zeros, double delay) {
  for (std::size_t i = 1; i < zeros.size(); ++i) {
    if (!(zeros[i] - zeros[i - 1] > delay)) {
      return false;
    }
  }
  return true;
}

void write_segments_csv(std::ostream& os, const Trajectory& traj) {
  os << "t_start,t_end,x_start,slope\n";
  for (const AffineSegment& s : traj.segments()) {
    os << format_number(s.t_start) << ',' << format_number(s.t_end) << ',' << format_number(s.x_start) << ','
       << format_number(s.slope) << '\n';
  }
}

void write_samples_csv(std::ostream& os, const Trajectory& traj, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw InvalidArgument("sample step must be positive");
  }
  os << "t,x\n";
  const double horizon = traj.horizon();
  const auto count = static_cast<std::size_t>(std::floor(horizon / step + 1e-9));
  double last = 0.0;
  for (std::size_t k = 0; k <= count; ++k) {
    last = std::min(static_cast<double>(k) * step, horizon);
    os << format_number(last) << ',' << format_number(traj.eval(last)) << '\n';
  }
  if (last < horizon) {
    os << format_number(horizon) << ',' << format_number(traj.eval(horizon)) << '\n';
  }
}

}  // namespace dde
