#include "cli.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "dde/analysis.hpp"
#include "dde/errors.hpp"
#include "dde/exact_solver.hpp"
#include "dde/report.hpp"
#include "dde/return_map.hpp"
#include "dde/smooth_solver.hpp"

namespace dde::cli {

namespace {

constexpr std::array<const char*, 4> kParamNames{"a1", "a2", "p1", "p2"};

struct ParamOptions {
  std::string config_path;
  std::array<double, 4> values{};
  std::array<CLI::Option*, 4> options{};
};

void add_param_options(CLI::App* sub, ParamOptions& p) {
  sub->add_option("--config", p.config_path, "TOML run configuration; flags override its values");
  for (std::size_t i = 0; i < kParamNames.size(); ++i) {
    p.options[i] = sub->add_option(std::string("--") + kParamNames[i], p.values[i]);
  }
}

Config load_config(const ParamOptions& p) {
  if (p.config_path.empty()) {
    return {};
  }
  return Config::load(p.config_path);
}

std::optional<double> pick(const CLI::Option* opt, double flag_value, const Config& cfg, const std::string& table,
                           const std::string& key) {
  if (opt != nullptr && opt->count() > 0) {
    return flag_value;
  }
  return cfg.number(table, key);
}

double require(std::optional<double> v, const std::string& name) {
  if (!v) {
    throw InvalidArgument("missing value for " + name);
  }
  return *v;
}

std::array<std::optional<double>, 4> param_values(const ParamOptions& p, const Config& cfg) {
  std::array<std::optional<double>, 4> out;
  for (std::size_t i = 0; i < kParamNames.size(); ++i) {
    out[i] = pick(p.options[i], p.values[i], cfg, "params", kParamNames[i]);
  }
  return out;
}

Params resolve_params(const ParamOptions& p, const Config& cfg) {
  const auto v = param_values(p, cfg);
  return Params(require(v[0], "--a1"), require(v[1], "--a2"), require(v[2], "--p1"), require(v[3], "--p2"));
}

Interpolation parse_interpolation(const std::string& name) {
  if (name == "cubic") {
    return Interpolation::Cubic;
  }
  if (name == "linear") {
    return Interpolation::Linear;
  }
  throw InvalidArgument("interpolation must be 'cubic' or 'linear', got '" + name + "'");
}

unsigned default_jobs() {
  if (const char* env = std::getenv("DDE_JOBS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) {
        return static_cast<unsigned>(v);
      }
    } catch (const std::exception&) {
    }
    throw InvalidArgument(std::string("DDE_JOBS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

Json params_json(const Params& p) {
  return Json{{"a1", json_number(p.a1())},
              {"a2", json_number(p.a2())},
              {"p1", json_number(p.p1())},
              {"p2", json_number(p.p2())},
              {"T", json_number(p.period())}};
}

Json numbers_json(const std::vector<double>& v) {
  Json j = Json::array();
  for (double x : v) {
    j.push_back(json_number(x));
  }
  return j;
}

Json conditions_json(const ConditionReport& c) {
  Json j = Json::object();
  for (const auto& [name, value] : c.flags()) {
    j[name] = value;
  }
  return j;
}

// ---------------------------------------------------------------- solve

struct SolveOptions {
  ParamOptions params;
  double h = 0.0;
  double horizon = 0.0;
  double delta = 0.0;
  double step = 1e-3;
  std::string interpolation = "cubic";
  double sample_step = 0.01;
  std::string csv = "trajectory.csv";
  std::string summary = "summary.json";
  std::string segments;
  CLI::Option* h_opt = nullptr;
  CLI::Option* horizon_opt = nullptr;
  CLI::Option* delta_opt = nullptr;
  CLI::Option* step_opt = nullptr;
  CLI::Option* interp_opt = nullptr;
  CLI::Option* sample_opt = nullptr;
};

int cmd_solve(const SolveOptions& o, std::ostream& out) {
  const Config cfg = load_config(o.params);
  const Params params = resolve_params(o.params, cfg);
  const double h = require(pick(o.h_opt, o.h, cfg, "solve", "h"), "--h");
  const double horizon = require(pick(o.horizon_opt, o.horizon, cfg, "solve", "horizon"), "--horizon");
  const double delta = pick(o.delta_opt, o.delta, cfg, "smoothing", "delta").value_or(0.0);
  const double sample_step = pick(o.sample_opt, o.sample_step, cfg, "solve", "sample_step").value_or(0.01);
  IntegratorConfig icfg;
  icfg.step = pick(o.step_opt, o.step, cfg, "integrator", "step").value_or(1e-3);
  std::string interp = o.interpolation;
  if (o.interp_opt->count() == 0) {
    interp = cfg.string("integrator", "interpolation").value_or(interp);
  }
  icfg.interpolation = parse_interpolation(interp);

  if (!std::isfinite(h) || h == 0.0) {
    throw InvalidArgument("--h must be finite and nonzero");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw InvalidArgument("--horizon must be positive");
  }
  if (!(sample_step > 0.0) || !std::isfinite(sample_step)) {
    throw InvalidArgument("--sample-step must be positive");
  }
  if (!o.segments.empty() && delta != 0.0) {
    throw InvalidArgument("--segments is only available for the exact solver (delta = 0)");
  }
  const SmoothingConfig scfg{delta};
  validate(params, scfg);
  if (delta > 0.0) {
    validate(icfg, scfg);
  }

  const double period = params.period();
  const Trajectory exact = solve_exact(params, h, horizon);
  Json summary;
  summary["solver"] = delta == 0.0 ? "exact" : "smooth";
  summary["params"] = params_json(params);
  summary["h"] = json_number(h);
  summary["horizon"] = json_number(horizon);
  summary["delta"] = json_number(delta);

  std::ostringstream csv;
  std::ostringstream segments_csv;
  std::vector<double> zeros;
  double x_at_period = std::nan("");
  if (delta == 0.0) {
    write_samples_csv(csv, exact, sample_step);
    write_segments_csv(segments_csv, exact);
    zeros = zero_crossings(exact);
    if (horizon >= period) {
      x_at_period = exact.eval(period);
    }
  } else {
    const SampledTrajectory smooth = integrate(params, scfg, icfg, ConstantHistory{h}, horizon);
    write_samples_csv(csv, smooth, sample_step);
    zeros = sampled_zero_crossings(smooth);
    if (horizon >= period) {
      x_at_period = smooth.eval(period);
    }
    double deviation = 0.0;
    for (std::size_t node = static_cast<std::size_t>(smooth.steps_per_delay()); node < smooth.size(); ++node) {
      const double t = smooth.time(node);
      if (t > horizon) {
        break;
      }
      deviation = std::max(deviation, std::abs(smooth.values()[node] - exact.eval(t)));
    }
    summary["step"] = json_number(icfg.step);
    summary["max_deviation_from_exact"] = json_number(deviation);
  }
  summary["zeros"] = numbers_json(zeros);
  summary["slowly_oscillating"] = is_slowly_oscillating(zeros);
  summary["x_at_T"] = json_number(x_at_period);

  write_file_atomic(o.csv, csv.str());
  if (!o.segments.empty()) {
    write_file_atomic(o.segments, segments_csv.str());
  }
  write_file_atomic(o.summary, dump_json(summary));
  out << dump_json(summary);
  return kExitOk;
}

// ---------------------------------------------------------------- map

int cmd_map(const ParamOptions& o, std::ostream& out) {
  const Config cfg = load_config(o);
  const Params params = resolve_params(o, cfg);
  const MapCoeffs coeffs = map_coefficients(params);
  const ConditionReport report = check_conditions(params);
  Json j;
  j["m"] = json_number(coeffs.m);
  j["b"] = json_number(coeffs.b);
  j["h_star"] = json_number(coeffs.h_star);
  j["conditions"] = conditions_json(report);
  j["overall"] = report.overall;
  if (const auto interval = valid_h_interval(params)) {
    j["valid_h_interval"] = {{"lo", json_number(interval->lo)}, {"hi", json_number(interval->hi)}};
  } else {
    j["valid_h_interval"] = nullptr;
  }
  out << dump_json(j);
  return kExitOk;
}

// ---------------------------------------------------------------- verify-table

struct VerifyOptions {
  std::string rows;
  std::string report = "verify_table.json";
};

int cmd_verify_table(const VerifyOptions& o, std::ostream& out) {
  std::vector<TableRow> rows;
  if (o.rows.empty()) {
    rows = reference_table();
  } else {
    std::ifstream in(o.rows);
    if (!in) {
      throw InvalidArgument("cannot read rows file " + o.rows);
    }
    rows = read_table_csv(in);
  }
  const TableReport report = verify_table(rows);
  write_file_atomic(o.report, dump_json(report.to_json()));
  for (const RowCheck& r : report.rows) {
    out << "row " << r.index + 1 << ": " << (r.pass() ? "PASS" : "FAIL") << "  h*="
        << (r.h_star ? format_number(*r.h_star) : std::string("n/a")) << "  |err|=" << format_number(r.h_star_error);
    for (const std::string& f : r.failures) {
      out << "  [" << f << "]";
    }
    out << '\n';
  }
  return report.all_pass() ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
  ParamOptions params;
  std::vector<std::string> axes;
  unsigned jobs = 1;
  CLI::Option* jobs_opt = nullptr;
  std::string csv = "sweep.csv";
  std::string json = "sweep.json";
};

int cmd_sweep(const SweepOptions& o, std::ostream& out) {
  const Config cfg = load_config(o.params);
  const auto base = param_values(o.params, cfg);

  std::array<std::optional<Axis>, 4> chosen;
  for (std::size_t i = 0; i < kParamNames.size(); ++i) {
    if (const auto spec = cfg.string("sweep", kParamNames[i])) {
      chosen[i] = parse_axis(*spec);
    }
  }
  for (const std::string& spec : o.axes) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("axis spec must look like name=lo:hi:count, got '" + spec + "'");
    }
    const std::string name = spec.substr(0, eq);
    std::size_t i = 0;
    while (i < kParamNames.size() && name != kParamNames[i]) {
      ++i;
    }
    if (i == kParamNames.size()) {
      throw InvalidArgument("unknown axis '" + name + "', expected a1, a2, p1 or p2");
    }
    chosen[i] = parse_axis(spec.substr(eq + 1));
  }

  SweepAxes axes;
  for (std::size_t i = 0; i < kParamNames.size(); ++i) {
    const Axis axis = chosen[i] ? *chosen[i] : Axis::fixed(require(base[i], std::string("--") + kParamNames[i]));
    if (!chosen[i] && !(axis.lo > 0.0)) {
      throw InvalidArgument(std::string("--") + kParamNames[i] + " must be positive");
    }
    axes.set(kParamNames[i], axis);
  }

  unsigned jobs = default_jobs();
  if (o.jobs_opt->count() > 0) {
    jobs = o.jobs;
  } else if (const auto j = cfg.number("sweep", "jobs")) {
    jobs = static_cast<unsigned>(*j);
  }
  if (jobs == 0) {
    throw InvalidArgument("--jobs must be positive");
  }

  const SweepReport report = sweep(axes, jobs);
  std::ostringstream csv;
  report.write_csv(csv);
  write_file_atomic(o.csv, csv.str());
  write_file_atomic(o.json, dump_json(report.to_json()));

  std::size_t passing = 0;
  for (const SweepCell& c : report.cells) {
    passing += c.conditions.overall ? 1 : 0;
  }
  out << report.cells.size() << " cells, " << passing << " admit the stable periodic orbit\n";
  return kExitOk;
}

// ---------------------------------------------------------------- smooth

struct SmoothOptions {
  ParamOptions params;
  std::vector<double> deltas{0.1, 0.05, 0.025, 0.0125};
  CLI::Option* deltas_opt = nullptr;
  double step = 1e-3;
  CLI::Option* step_opt = nullptr;
  std::string interpolation = "cubic";
  CLI::Option* interp_opt = nullptr;
  unsigned jobs = 1;
  CLI::Option* jobs_opt = nullptr;
  std::string report = "convergence.json";
};

int cmd_smooth(const SmoothOptions& o, std::ostream& out) {
  const Config cfg = load_config(o.params);
  const Params params = resolve_params(o.params, cfg);
  std::vector<double> deltas = o.deltas;
  if (o.deltas_opt->count() == 0) {
    deltas = cfg.numbers("smooth", "deltas").value_or(deltas);
  }
  if (deltas.empty()) {
    throw InvalidArgument("--deltas needs at least one value");
  }
  for (double d : deltas) {
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw InvalidArgument("deltas must be nonnegative");
    }
  }
  IntegratorConfig icfg;
  icfg.step = pick(o.step_opt, o.step, cfg, "integrator", "step").value_or(1e-3);
  std::string interp = o.interpolation;
  if (o.interp_opt->count() == 0) {
    interp = cfg.string("integrator", "interpolation").value_or(interp);
  }
  icfg.interpolation = parse_interpolation(interp);
  validate(icfg, SmoothingConfig{0.0});

  unsigned jobs = o.jobs_opt->count() > 0 ? o.jobs : default_jobs();
  if (jobs == 0) {
    throw InvalidArgument("--jobs must be positive");
  }

  const ConvergenceReport report = convergence_study(params, deltas, icfg, jobs);
  Json j;
  j["params"] = params_json(params);
  j["step"] = json_number(icfg.step);
  const Json body = report.to_json();
  for (const auto& [key, value] : body.items()) {
    j[key] = value;
  }
  write_file_atomic(o.report, dump_json(j));
  out << dump_json(j);

  bool any_ok = false;
  for (const ConvergenceEntry& e : report.entries) {
    any_ok = any_ok || e.ok();
  }
  return any_ok ? kExitOk : kExitFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Periodic solutions of x'(t) = a(t) f(x(t - 1)) with piecewise-constant a and sign feedback"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  SolveOptions solve;
  auto* s = app.add_subcommand("solve", "Solve forward from a constant history and write the trajectory");
  add_param_options(s, solve.params);
  solve.h_opt = s->add_option("--h", solve.h, "Constant initial history value");
  solve.horizon_opt = s->add_option("--horizon", solve.horizon, "End time");
  solve.delta_opt = s->add_option("--delta", solve.delta, "Smoothing half-width; 0 uses the exact solver");
  solve.step_opt = s->add_option("--step", solve.step, "Integrator step for delta > 0");
  solve.interp_opt = s->add_option("--interp", solve.interpolation, "Dense output: cubic or linear");
  solve.sample_opt = s->add_option("--sample-step", solve.sample_step, "Sampling step of the trajectory CSV");
  s->add_option("--csv", solve.csv, "Trajectory CSV path (t, x)");
  s->add_option("--summary", solve.summary, "Summary JSON path");
  s->add_option("--segments", solve.segments, "Optional affine segment CSV path (exact solver only)");

  ParamOptions map;
  auto* m = app.add_subcommand("map", "Print the closed-form return map and its conditions");
  add_param_options(m, map);

  VerifyOptions verify;
  auto* v = app.add_subcommand("verify-table", "Check the reference parameter table");
  v->add_option("--rows", verify.rows, "CSV with a1,a2,p1,p2,h_star,T rows (default: built-in table)");
  v->add_option("--report", verify.report, "Report JSON path");

  SweepOptions sweep_opts;
  auto* w = app.add_subcommand("sweep", "Classify a grid of parameter sets");
  add_param_options(w, sweep_opts.params);
  w->add_option("--axis", sweep_opts.axes, "Grid axis name=lo:hi:count (repeatable)");
  sweep_opts.jobs_opt = w->add_option("--jobs", sweep_opts.jobs, "Worker threads (default: DDE_JOBS or 1)");
  w->add_option("--csv", sweep_opts.csv, "Sweep CSV path");
  w->add_option("--json", sweep_opts.json, "Sweep JSON path");

  SmoothOptions smooth;
  auto* sm = app.add_subcommand("smooth", "Fixed point and orbit distance of the smoothed system per delta");
  add_param_options(sm, smooth.params);
  smooth.deltas_opt = sm->add_option("--deltas", smooth.deltas, "Smoothing half-widths")->delimiter(',');
  smooth.step_opt = sm->add_option("--step", smooth.step, "Integrator step");
  smooth.interp_opt = sm->add_option("--interp", smooth.interpolation, "Dense output: cubic or linear");
  smooth.jobs_opt = sm->add_option("--jobs", smooth.jobs, "Worker threads (default: DDE_JOBS or 1)");
  sm->add_option("--report", smooth.report, "Convergence report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (s->parsed()) {
      return cmd_solve(solve, out);
    }
    if (m->parsed()) {
      return cmd_map(map, out);
    }
    if (v->parsed()) {
      return cmd_verify_table(verify, out);
    }
    if (w->parsed()) {
      return cmd_sweep(sweep_opts, out);
    }
    if (sm->parsed()) {
      return cmd_smooth(smooth, out);
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace dde::cli
