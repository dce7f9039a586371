#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "dde/analysis.hpp"
#include "dde/errors.hpp"
#include "dde/exact_solver.hpp"
#include "dde/return_map.hpp"

using namespace dde;

namespace {

const Params kRow1(1.0, 0.25, 2.5, 1.5);

// Forward Euler on a grid aligned with the delay, with the delayed value
// taken at the grid node. Independent of the event machinery; first order.
double brute_force(const Params& p, double h, double t_end, int per_delay) {
  const double dt = 1.0 / per_delay;
  const auto steps = static_cast<std::size_t>(std::llround(t_end * per_delay));
  std::vector<double> x(static_cast<std::size_t>(per_delay) + 1 + steps, h);
  for (std::size_t i = per_delay; i + 1 < x.size(); ++i) {
    const double t = (static_cast<double>(i) - per_delay + 0.5) * dt;
    const double r = t - std::floor(t / p.period()) * p.period();
    const double a = r < p.p1() ? p.a1() : p.a2();
    const double delayed = x[i - per_delay];
    const double f = delayed > 0 ? -1.0 : (delayed < 0 ? 1.0 : 0.0);
    x[i + 1] = x[i] + dt * a * f;
  }
  return x.back();
}

}  // namespace

TEST_CASE("row 1 landmarks match the closed-form shape values") {
  const double h = 0.25;
  const double a1 = 1.0, a2 = 0.25, p1 = 2.5, p2 = 1.5;
  // closed forms written out independently of the return_map module
  const double x1 = -h + a1 * p1 - 2 * a1;
  const double x2 = (a2 / a1 - 1) * h + a1 * p1 - 2 * a1 + 3 * a2 - a2 * p1;
  const double x3 = (2 * a2 / a1 - 1) * h + a1 * (p1 - 2) + a2 * (6 - (2 * p1 + p2));
  CHECK(x1 == 0.25);
  CHECK(x2 == 0.4375);
  CHECK(x3 == 0.25);

  const Trajectory traj = solve_exact(kRow1, h, 4.0);
  CHECK(std::abs(traj.eval(2.5) - x1) <= 1e-10);
  CHECK(std::abs(traj.eval(h / a1 + 3) - x2) <= 1e-10);
  CHECK(std::abs(traj.eval(4.0) - x3) <= 1e-10);
  CHECK(traj.eval(0.0) == h);
  CHECK(std::abs(traj.eval(0.25)) <= 1e-15);
}

TEST_CASE("fixed point history is periodic for every reference row") {
  for (const TableRow& row : reference_table()) {
    const Params p(row.a1, row.a2, row.p1, row.p2);
    const double h_star = map_coefficients(p).h_star;
    const Trajectory traj = solve_exact(p, h_star, 10 * p.period());
    for (int k = 1; k <= 10; ++k) {
      CHECK(std::abs(traj.eval(k * p.period()) - h_star) <= 1e-10);
    }
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ts(0.0, 9 * p.period());
    for (int i = 0; i < 1000; ++i) {
      const double t = ts(rng);
      CHECK(std::abs(traj.eval(t + p.period()) - traj.eval(t)) <= 1e-10);
    }
  }
}

TEST_CASE("negated history gives the negated trajectory") {
  const Trajectory up = solve_exact(kRow1, 0.3, 12.0);
  const Trajectory down = solve_exact(kRow1, -0.3, 12.0);
  REQUIRE(up.segments().size() == down.segments().size());
  for (int i = 0; i <= 1000; ++i) {
    const double t = 12.0 * i / 1000;
    CHECK(std::abs(up.eval(t) + down.eval(t)) <= 1e-12);
  }
  CHECK(zero_crossings(up) == zero_crossings(down));
}

TEST_CASE("zero crossings and slow oscillation") {
  const Trajectory traj = solve_exact(kRow1, 0.25, 8.0);
  const auto zeros = zero_crossings(traj);
  REQUIRE(zeros.size() == 4);
  const std::vector<double> expected{0.25, 2.25, 4.25, 6.25};
  for (std::size_t i = 0; i < zeros.size(); ++i) {
    CHECK(std::abs(zeros[i] - expected[i]) <= 1e-12);
  }
  CHECK(is_slowly_oscillating(zeros));

  CHECK(zero_crossings(solve_exact(kRow1, 0.25, 0.2)).empty());

  const std::vector<double> good{0.25, 2.25, 4.25};
  const std::vector<double> bad{1.0, 1.5};
  CHECK(is_slowly_oscillating(good));
  CHECK(is_slowly_oscillating(std::vector<double>{}));
  CHECK(is_slowly_oscillating(std::vector<double>{3.0}));
  CHECK_FALSE(is_slowly_oscillating(bad));
}

TEST_CASE("segment slopes satisfy the equation and junctions are continuous") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int solved = 0;
  while (solved < 50) {
    const Params p(0.5 + 4.5 * u(rng), 0.1 + 3 * u(rng), 1.0 + 4 * u(rng), 0.5 + 4 * u(rng));
    const double h = (u(rng) < 0.5 ? -1 : 1) * (0.05 + 2 * u(rng));
    const double horizon = 5 * p.period();
    const Trajectory traj = solve_exact(p, h, horizon);
    ++solved;
    const Model model(p, {0.0});
    const auto segs = traj.segments();
    for (std::size_t k = 0; k < segs.size(); ++k) {
      CHECK(segs[k].t_end > segs[k].t_start);
      if (k > 0) {
        CHECK(segs[k].t_start == segs[k - 1].t_end);
        CHECK(std::abs(segs[k].x_start - segs[k - 1].x_end()) <= 1e-12 * horizon);
      }
      const double t = segs[k].t_start + (0.05 + 0.9 * u(rng)) * (segs[k].t_end - segs[k].t_start);
      CHECK(segs[k].slope == model.coefficient(t) * model.feedback(traj.eval_with_history(t - 1.0)));
    }
  }
}

TEST_CASE("agrees with a brute-force Euler integration") {
  for (const TableRow& row : reference_table()) {
    const Params p(row.a1, row.a2, row.p1, row.p2);
    const double horizon = 2 * p.period();
    for (double h : {0.2, 0.7, -0.4}) {
      const double exact = solve_exact(p, h, horizon).eval(horizon);
      CHECK(std::abs(brute_force(p, h, horizon, 20000) - exact) <= 2e-3);
    }
  }
}

TEST_CASE("one-signed histories reduce to their value at zero") {
  const Trajectory c = solve_exact(kRow1, 0.4, 8.0);
  const Trajectory f = solve_exact(kRow1, History{FunctionHistory{[](double s) { return 0.4 + 0.3 * s * s; }}}, 8.0);
  CHECK(c.eval(8.0) == f.eval(8.0));
  CHECK_THROWS_AS(solve_exact(kRow1, History{FunctionHistory{[](double s) { return s + 0.5; }}}, 8.0),
                  InvalidArgument);
  CHECK(solve_exact(kRow1, History{ConstantHistory{0.4}}, 8.0).eval(8.0) == c.eval(8.0));
}

TEST_CASE("argument errors") {
  CHECK_THROWS_AS(solve_exact(kRow1, 0.0, 4.0), InvalidArgument);
  CHECK_THROWS_AS(solve_exact(kRow1, 0.25, 0.0), InvalidArgument);
  CHECK_THROWS_AS(solve_exact(kRow1, 0.25, -1.0), InvalidArgument);
  const Trajectory traj = solve_exact(kRow1, 0.25, 4.0);
  CHECK_THROWS_AS(traj.eval(-0.1), InvalidArgument);
  CHECK_THROWS_AS(traj.eval(4.1), InvalidArgument);
  CHECK(traj.eval_with_history(-0.5) == 0.25);
  CHECK_THROWS_AS(solve_exact(kRow1, 0.25, 400.0, ExactSolverOptions{10}), RunawayError);
}

TEST_CASE("event queue drains coincident events together") {
  EventQueue q;
  q.push({2.0, EventKind::DelayedZero});
  q.push({1.0, EventKind::CoefficientSwitch});
  q.push({1.0 + 5e-13, EventKind::DelayedZero});
  CHECK(q.next_time() == 1.0);
  CHECK(q.pop_through(1.0).size() == 2);
  CHECK(q.next_time() == 2.0);
  CHECK(q.pushed() == 3);
}

TEST_CASE("csv output") {
  const Trajectory traj = solve_exact(kRow1, 0.25, 4.0);
  std::ostringstream seg;
  write_segments_csv(seg, traj);
  CHECK(seg.str().rfind("t_start,t_end,x_start,slope\n0,1.25,0.25,-1\n", 0) == 0);
  std::ostringstream samples;
  write_samples_csv(samples, traj, 1.5);
  CHECK(samples.str() == "t,x\n0,0.25\n1.5,-0.75\n3,0.375\n4,0.25\n");
}
