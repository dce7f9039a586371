#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "dde/analysis.hpp"
#include "dde/errors.hpp"
#include "dde/exact_solver.hpp"
#include "dde/return_map.hpp"
#include "dde/smooth_solver.hpp"

using namespace dde;

namespace {

const Params kRow1(1.0, 0.25, 2.5, 1.5);

// x'(t) = -x(t - 1), x = 1 on [-1, 0]. On [k, k + 1] the solution is a
// polynomial P_k(u), u = t - k, with P_k(u) = P_{k-1}(1) - int_0^u P_{k-1}.
double linear_delay_exact(int k_end) {
  std::vector<double> prev{1.0};
  for (int k = 0; k < k_end; ++k) {
    double at_one = 0.0;
    for (double c : prev) {
      at_one += c;
    }
    std::vector<double> next(prev.size() + 1);
    next[0] = at_one;
    for (std::size_t j = 0; j < prev.size(); ++j) {
      next[j + 1] = -prev[j] / static_cast<double>(j + 1);
    }
    prev = std::move(next);
  }
  double at_one = 0.0;
  for (double c : prev) {
    at_one += c;
  }
  return at_one;
}

double linear_delay_numeric(double step, Interpolation interp) {
  const DelayRhs rhs = [](double, double, double xd) { return -xd; };
  return integrate_dde(rhs, ConstantHistory{1.0}, {step, interp}, 6.0).eval(6.0);
}

}  // namespace

TEST_CASE("integrator config validation") {
  CHECK_NOTHROW(validate(IntegratorConfig{1e-3}, SmoothingConfig{0.01}));
  CHECK_THROWS_AS(validate(IntegratorConfig{0.3}, SmoothingConfig{0.0}), InvalidArgument);
  CHECK_THROWS_AS(validate(IntegratorConfig{0.0}, SmoothingConfig{0.0}), InvalidArgument);
  CHECK_THROWS_AS(validate(IntegratorConfig{1e-2}, SmoothingConfig{0.01}), InvalidArgument);
  CHECK_THROWS_AS(integrate(kRow1, {0.01}, {1e-2}, ConstantHistory{0.25}, 4.0), InvalidArgument);
  CHECK_THROWS_AS(integrate(kRow1, {0.01}, {1e-3}, ConstantHistory{0.25}, 0.0), InvalidArgument);
}

TEST_CASE("fourth order on a smooth delay equation") {
  const double exact = linear_delay_exact(6);
  const double e1 = std::abs(linear_delay_numeric(1.0 / 10, Interpolation::Cubic) - exact);
  const double e2 = std::abs(linear_delay_numeric(1.0 / 20, Interpolation::Cubic) - exact);
  const double e3 = std::abs(linear_delay_numeric(1.0 / 40, Interpolation::Cubic) - exact);
  MESSAGE("errors " << e1 << " " << e2 << " " << e3);
  CHECK(e1 / e2 >= 8.0);
  CHECK(e2 / e3 >= 8.0);
  // linear dense output is second order but still converges
  const double l1 = std::abs(linear_delay_numeric(1.0 / 20, Interpolation::Linear) - exact);
  const double l2 = std::abs(linear_delay_numeric(1.0 / 40, Interpolation::Linear) - exact);
  CHECK(l2 < l1);
}

TEST_CASE("sampled trajectory keeps the history and interpolates continuously") {
  const SampledTrajectory traj = integrate(kRow1, {0.05}, {1e-3}, ConstantHistory{0.3}, 4.0);
  CHECK(traj.eval(-1.0) == 0.3);
  CHECK(traj.eval(-0.5) == 0.3);
  CHECK(traj.eval(0.0) == 0.3);
  CHECK(traj.time(0) == -1.0);
  CHECK(traj.t_end() == doctest::Approx(4.0).epsilon(1e-15));
  CHECK_THROWS_AS(traj.eval(-1.5), InvalidArgument);
  CHECK_THROWS_AS(traj.eval(4.5), InvalidArgument);
  for (std::size_t node = 1000; node + 1 < traj.size(); node += 97) {
    const double t = traj.time(node);
    CHECK(std::abs(traj.eval(t) - traj.values()[node]) <= 1e-12);
    CHECK(std::abs(traj.eval_in(node - 1, 1.0) - traj.values()[node]) <= 1e-12);
  }
  const SampledTrajectory fn =
      integrate(kRow1, {0.05}, {1e-3}, FunctionHistory{[](double s) { return 0.3 + 0.1 * s; }}, 1.0);
  CHECK(fn.eval(-0.5) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("small delta stays close to the exact periodic orbit") {
  const SampledTrajectory traj = integrate(kRow1, {0.001}, {2.5e-4}, ConstantHistory{0.25}, 4.0);
  CHECK(std::abs(traj.eval(4.0) - 0.25) <= 1e-3);
}

TEST_CASE("negated history gives the negated trajectory") {
  const SampledTrajectory up = integrate(kRow1, {0.05}, {1e-3}, ConstantHistory{0.3}, 8.0);
  const SampledTrajectory down = integrate(kRow1, {0.05}, {1e-3}, ConstantHistory{-0.3}, 8.0);
  for (std::size_t i = 0; i < up.size(); ++i) {
    CHECK(std::abs(up.values()[i] + down.values()[i]) <= 1e-12);
  }
  for (double h : {0.2, 0.25, 0.3}) {
    CHECK(std::abs(poincare_map(kRow1, {0.05}, {1e-3}, -h) + poincare_map(kRow1, {0.05}, {1e-3}, h)) <= 1e-10);
  }
}

TEST_CASE("deviation from the exact solution is of order delta") {
  for (const TableRow& row : reference_table()) {
    const Params p(row.a1, row.a2, row.p1, row.p2);
    const double h = map_coefficients(p).h_star;
    const double delta = 0.05;
    const double horizon = 2 * p.period();
    const SampledTrajectory smooth = integrate(p, {delta}, {1e-3}, ConstantHistory{h}, horizon);
    const Trajectory exact = solve_exact(p, h, horizon);
    double worst = 0.0;
    for (std::size_t node = 1000; node < smooth.size(); ++node) {
      const double t = smooth.time(node);
      if (t <= horizon) {
        worst = std::max(worst, std::abs(smooth.values()[node] - exact.eval(t)));
      }
    }
    MESSAGE("row a1=" << row.a1 << " a2=" << row.a2 << ": max deviation " << worst << " = " << worst / delta
                      << " delta");
    CHECK(worst <= std::max(1.0, row.a1) * delta);
  }
}

TEST_CASE("poincare map") {
  const auto [m, b] = map_slope_intercept(kRow1);
  for (double h : {0.1, 0.25, 0.4}) {
    CHECK(std::abs(poincare_map(kRow1, {0.0}, {1e-3}, h) - (m * h + b)) <= 1e-12);
  }
  CHECK(std::abs(poincare_map(kRow1, {0.01}, {1e-3}, 0.25) - 0.25) <= 5e-3);

  // affine wherever the trajectory crosses the ramp bands cleanly
  const double h = 0.25;
  const double eps = 0.01;
  const IntegratorConfig icfg{1e-3};
  const double second = poincare_map(kRow1, {0.01}, icfg, h + eps) - 2 * poincare_map(kRow1, {0.01}, icfg, h) +
                        poincare_map(kRow1, {0.01}, icfg, h - eps);
  CHECK(std::abs(second) <= 1e-6);
}

TEST_CASE("fixed point of the smoothed map") {
  for (const TableRow& row : reference_table()) {
    const Params p(row.a1, row.a2, row.p1, row.p2);
    const MapCoeffs c = map_coefficients(p);
    const FixedPointResult sharp = find_fixed_point(p, {0.0}, {1e-3});
    CHECK(sharp.h_delta == c.h_star);
    CHECK(sharp.map_slope == c.m);
    CHECK(sharp.residual <= 1e-12);

    const FixedPointResult smooth = find_fixed_point(p, {0.05}, {1e-3});
    CHECK(smooth.residual <= 1e-9);
    CHECK(std::abs(smooth.map_slope) < 1.0);
  }

  double prev = 1.0;
  for (double delta : {0.1, 0.05, 0.01}) {
    const FixedPointResult r = find_fixed_point(kRow1, {delta}, {1e-3});
    const double gap = std::abs(r.h_delta - 0.25);
    MESSAGE("delta " << delta << ": h_delta " << r.h_delta);
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("first-order shift of the smoothed fixed point") {
  // The ramp of a across t = 0 lowers the integrated coefficient on
  // [0, delta] by (a1 - a2) delta / 4, which delays the first zero like a
  // larger initial value; the ramp across T removes the same amount just
  // before x(T). Hence P_delta(h) = m h + b + (m - 1)(a1 - a2) delta / 4 and
  // h_delta = h* - (a1 - a2) delta / 4 while the ramps do not interact.
  for (double delta : {0.1, 0.05, 0.025, 0.0125}) {
    // step aligned with the ramp edges so the quadrature is exact
    const FixedPointResult r = find_fixed_point(kRow1, {delta}, {delta / 8});
    CHECK(std::abs(r.h_delta - (0.25 - 0.75 * delta / 4)) <= 1e-8);
  }
}

TEST_CASE("fixed point errors") {
  CHECK_THROWS_AS(find_fixed_point(Params(1, 0.25, 1.5, 2.5), {0.05}, {1e-3}), PreconditionError);
  CHECK_THROWS_AS(find_fixed_point(kRow1, {0.3}, {1e-3}), InvalidArgument);  // delta >= h*
  FixedPointOptions narrow;
  narrow.bracket_fraction = 1e-3;
  CHECK_THROWS_AS(find_fixed_point(kRow1, {0.1}, {1e-3}, narrow), BracketFailure);
}

TEST_CASE("orbit distance") {
  CHECK(orbit_distance(kRow1, {0.0}, {1e-3}) <= 1e-8);
  const double d1 = orbit_distance(kRow1, {0.1}, {1e-3});
  const double d2 = orbit_distance(kRow1, {0.05}, {1e-3});
  const double d3 = orbit_distance(kRow1, {0.01}, {1e-3});
  CHECK(d1 > d2);
  CHECK(d2 > d3);
}

TEST_CASE("monotone convergence under step refinement at fixed delta") {
  const double delta = 0.05;
  const double reference = poincare_map(kRow1, {delta}, {1.0 / 2560}, 0.3);
  double prev = 1.0;
  for (int n : {80, 160, 320, 640}) {
    const double err = std::abs(poincare_map(kRow1, {delta}, {1.0 / n}, 0.3) - reference);
    CHECK(err <= prev + 1e-12);  // already at round-off on aligned grids
    prev = err;
  }
}

TEST_CASE("smoothed orbit is stable and slowly oscillating") {
  const double delta = 0.05;
  const IntegratorConfig icfg{1e-3};
  const FixedPointResult fp = find_fixed_point(kRow1, {delta}, icfg);
  const double period = kRow1.period();

  const SampledTrajectory traj = integrate(kRow1, {delta}, icfg, ConstantHistory{1.1 * fp.h_delta}, 5 * period);
  double prev = 0.1 * fp.h_delta;
  for (int k = 1; k <= 5; ++k) {
    const double dev = std::abs(traj.eval(k * period) - fp.h_delta);
    CHECK(std::abs(dev / prev - std::abs(fp.map_slope)) <= 0.1 * std::abs(fp.map_slope));
    prev = dev;
  }

  const SampledTrajectory orbit = integrate(kRow1, {delta}, icfg, ConstantHistory{fp.h_delta}, 3 * period);
  const auto zeros = sampled_zero_crossings(orbit);
  CHECK(zeros.size() >= 5);
  CHECK(is_slowly_oscillating(zeros));
}

TEST_CASE("convergence study") {
  const std::vector<double> deltas{0.1, 0.05, 0.025, 0.0125};
  const ConvergenceReport serial = convergence_study(kRow1, deltas, {1e-3}, 1);
  const ConvergenceReport threaded = convergence_study(kRow1, deltas, {1e-3}, 4);
  CHECK(dump_json(serial.to_json()) == dump_json(threaded.to_json()));
  REQUIRE(serial.fitted_k.has_value());
  for (const ConvergenceEntry& e : serial.entries) {
    REQUIRE(e.ok());
    CHECK(*e.orbit_distance <= 1.1 * *serial.fitted_k * e.delta);
  }

  // a too-small delta for the step fails on its own without sinking the rest
  const std::vector<double> mixed{0.05, 0.001};
  const ConvergenceReport partial = convergence_study(kRow1, mixed, {1e-3}, 2);
  CHECK(partial.entries[0].ok());
  CHECK_FALSE(partial.entries[1].ok());
  CHECK_FALSE(partial.entries[1].error.empty());
}

TEST_CASE("sampled csv") {
  const SampledTrajectory traj = integrate(kRow1, {0.05}, {1e-3}, ConstantHistory{0.25}, 1.0);
  std::ostringstream os;
  write_samples_csv(os, traj, 0.5);
  CHECK(os.str().rfind("t,x\n0,0.25\n0.5,", 0) == 0);
}
