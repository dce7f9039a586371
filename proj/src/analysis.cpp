#include "dde/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "dde/errors.hpp"
#include "dde/exact_solver.hpp"
#include "dde/parallel.hpp"

namespace dde {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text) {
  const std::string s = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("not a number: '" + s + "'");
  }
  if (used != s.size()) {
    throw InvalidArgument("not a number: '" + s + "'");
  }
  return v;
}

Json conditions_json(const ConditionReport& c) {
  Json j = Json::object();
  for (const auto& [name, value] : c.flags()) {
    j[name] = value;
  }
  return j;
}

}  // namespace

std::vector<TableRow> reference_table() {
  return {
      {1.0, 0.25, 2.5, 1.5, 0.25, 4.0, false},
      {2.0, 0.5, 2.5, 2.0, 1.0 / 3.0, 4.5, true},
      {2.0, 0.25, 2.5, 1.0, 4.0 / 7.0, 3.5, true},
      {1.0, 0.5, 3.0, 1.0, 0.5, 4.0, false},
      {2.0, 1.0, 3.0, 1.5, 0.5, 4.5, false},
      {2.5, 0.5, 3.0, 4.0, 0.31, 7.0, false},
      {3.0, 0.5, 3.0, 4.5, 0.45, 7.5, false},
      {5.0, 0.5, 3.0, 3.0, 1.94, 6.0, false},
      {5.0, 1.0, 3.0, 2.0, 1.88, 5.0, false},
  };
}

bool TableReport::all_pass() const noexcept {
  return std::all_of(rows.begin(), rows.end(), [](const RowCheck& r) { return r.pass(); });
}

Json TableReport::to_json() const {
  Json out;
  out["all_pass"] = all_pass();
  Json list = Json::array();
  for (const RowCheck& r : rows) {
    Json j;
    j["row"] = r.index + 1;
    j["params"] = {{"a1", json_number(r.row.a1)},
                   {"a2", json_number(r.row.a2)},
                   {"p1", json_number(r.row.p1)},
                   {"p2", json_number(r.row.p2)}};
    j["h_star_expected"] = json_number(r.row.h_star_expected);
    j["h_star_computed"] = r.h_star ? json_number(*r.h_star) : Json(nullptr);
    j["h_star_error"] = json_number(r.h_star_error);
    j["h_star_tolerance"] = json_number(r.h_star_tolerance);
    j["return_error"] = json_number(r.return_error);
    j["period_error"] = json_number(r.period_error);
    j["conditions"] = conditions_json(r.conditions);
    j["pass"] = r.pass();
    j["failures"] = r.failures;
    list.push_back(std::move(j));
  }
  out["rows"] = std::move(list);
  return out;
}

TableReport verify_table(std::span<const TableRow> rows) {
  TableReport report;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    RowCheck check;
    check.index = i;
    check.row = rows[i];
    check.h_star_tolerance = rows[i].exact ? kExactTableTolerance : kRoundedTableTolerance;
    try {
      const Params params(rows[i].a1, rows[i].a2, rows[i].p1, rows[i].p2);
      check.conditions = check_conditions(params);
      if (!check.conditions.overall) {
        for (const auto& [name, ok] : check.conditions.flags()) {
          if (!ok) {
            check.failures.push_back("condition " + name + " fails");
          }
        }
      }
      const MapCoeffs coeffs = map_coefficients(params);
      check.h_star = coeffs.h_star;
      check.h_star_error = std::abs(coeffs.h_star - rows[i].h_star_expected);
      if (!(check.h_star_error <= check.h_star_tolerance)) {
        check.failures.push_back("h_star off by " + format_number(check.h_star_error));
      }
      check.period_error = std::abs(params.period() - rows[i].period_expected);
      if (!(check.period_error <= 1e-12)) {
        check.failures.push_back("period off by " + format_number(check.period_error));
      }
      if (coeffs.h_star > 0.0) {
        const double back = solve_exact(params, coeffs.h_star, params.period()).eval(params.period());
        check.return_error = std::abs(back - coeffs.h_star);
        if (!(check.return_error <= kReturnTolerance)) {
          check.failures.push_back("x(T) misses h_star by " + format_number(check.return_error));
        }
      } else {
        check.failures.push_back("h_star is not positive");
      }
    } catch (const Error& e) {
      check.failures.push_back(e.what());
    }
    report.rows.push_back(std::move(check));
  }
  return report;
}

std::vector<TableRow> read_table_csv(std::istream& is) {
  std::vector<TableRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    if (header) {
      header = false;
      if (line.find_first_of("0123456789") != 0 && line.front() != '.' && line.front() != '-') {
        continue;
      }
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) {
      fields.push_back(trim(f));
    }
    if (fields.size() != 6) {
      throw InvalidArgument("table row needs 6 fields: " + line);
    }
    TableRow row{};
    row.a1 = parse_double(fields[0]);
    row.a2 = parse_double(fields[1]);
    row.p1 = parse_double(fields[2]);
    row.p2 = parse_double(fields[3]);
    if (const auto slash = fields[4].find('/'); slash != std::string::npos) {
      row.h_star_expected = parse_double(fields[4].substr(0, slash)) / parse_double(fields[4].substr(slash + 1));
      row.exact = true;
    } else {
      row.h_star_expected = parse_double(fields[4]);
    }
    row.period_expected = parse_double(fields[5]);
    rows.push_back(row);
  }
  return rows;
}

double Axis::value(int k) const noexcept {
  if (count <= 1) {
    return lo;
  }
  if (k == count - 1) {
    return hi;
  }
  return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
}

Axis parse_axis(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) {
    parts.push_back(p);
  }
  Axis axis;
  if (parts.size() == 1) {
    axis = Axis::fixed(parse_double(parts[0]));
  } else if (parts.size() == 3) {
    axis.lo = parse_double(parts[0]);
    axis.hi = parse_double(parts[1]);
    const double count = parse_double(parts[2]);
    if (count < 1 || count != std::floor(count) || count > 1e7) {
      throw InvalidArgument("axis count must be a positive integer: " + spec);
    }
    axis.count = static_cast<int>(count);
  } else {
    throw InvalidArgument("axis must be lo:hi:count or a single value: " + spec);
  }
  if (!(axis.lo > 0.0) || !(axis.hi > 0.0) || !std::isfinite(axis.lo) || !std::isfinite(axis.hi) ||
      axis.hi < axis.lo) {
    throw InvalidArgument("axis bounds must be positive, finite and ordered: " + spec);
  }
  return axis;
}

SweepAxes SweepAxes::around(const Params& p) noexcept {
  return {Axis::fixed(p.a1()), Axis::fixed(p.a2()), Axis::fixed(p.p1()), Axis::fixed(p.p2())};
}

void SweepAxes::set(const std::string& name, const Axis& axis) {
  if (name == "a1") {
    a1 = axis;
  } else if (name == "a2") {
    a2 = axis;
  } else if (name == "p1") {
    p1 = axis;
  } else if (name == "p2") {
    p2 = axis;
  } else {
    throw InvalidArgument("unknown axis '" + name + "', expected a1, a2, p1 or p2");
  }
}

std::size_t SweepAxes::cell_count() const noexcept {
  return static_cast<std::size_t>(a1.count) * a2.count * p1.count * p2.count;
}

SweepReport sweep(const SweepAxes& axes, unsigned jobs) {
  SweepReport report{axes, {}};
  report.cells.resize(axes.cell_count());
  const auto n2 = static_cast<std::size_t>(axes.a2.count);
  const auto n3 = static_cast<std::size_t>(axes.p1.count);
  const auto n4 = static_cast<std::size_t>(axes.p2.count);

  parallel_for(report.cells.size(), jobs, [&](std::size_t idx) {
    std::size_t rest = idx;
    const auto k4 = static_cast<int>(rest % n4);
    rest /= n4;
    const auto k3 = static_cast<int>(rest % n3);
    rest /= n3;
    const auto k2 = static_cast<int>(rest % n2);
    const auto k1 = static_cast<int>(rest / n2);

    SweepCell& cell = report.cells[idx];
    cell.a1 = axes.a1.value(k1);
    cell.a2 = axes.a2.value(k2);
    cell.p1 = axes.p1.value(k3);
    cell.p2 = axes.p2.value(k4);
    try {
      const Params params(cell.a1, cell.a2, cell.p1, cell.p2);
      cell.params_valid = true;
      cell.conditions = check_conditions(params);
      const auto [m, b] = map_slope_intercept(params);
      cell.m = m;
      cell.b = b;
      if (cell.conditions.overall) {
        cell.h_star = map_coefficients(params).h_star;
      }
    } catch (const InvalidArgument&) {
      cell.params_valid = false;
    }
  });
  return report;
}

Json SweepReport::to_json() const {
  auto axis_json = [](const Axis& a) {
    return Json{{"lo", json_number(a.lo)}, {"hi", json_number(a.hi)}, {"count", a.count}};
  };
  Json j;
  j["axes"] = {{"a1", axis_json(axes.a1)}, {"a2", axis_json(axes.a2)}, {"p1", axis_json(axes.p1)},
               {"p2", axis_json(axes.p2)}};
  Json list = Json::array();
  std::size_t passing = 0;
  for (const SweepCell& c : cells) {
    Json cj;
    cj["a1"] = json_number(c.a1);
    cj["a2"] = json_number(c.a2);
    cj["p1"] = json_number(c.p1);
    cj["p2"] = json_number(c.p2);
    cj["params_valid"] = c.params_valid;
    cj["overall"] = c.conditions.overall;
    cj["m"] = c.m ? json_number(*c.m) : Json(nullptr);
    cj["b"] = c.b ? json_number(*c.b) : Json(nullptr);
    cj["h_star"] = c.h_star ? json_number(*c.h_star) : Json(nullptr);
    cj["conditions"] = conditions_json(c.conditions);
    passing += c.conditions.overall ? 1 : 0;
    list.push_back(std::move(cj));
  }
  j["cell_count"] = cells.size();
  j["passing"] = passing;
  j["cells"] = std::move(list);
  return j;
}

void SweepReport::write_csv(std::ostream& os) const {
  os << "a1,a2,p1,p2,params_valid,p1_gt_2,b_positive,contraction,shape_window,x3_positive,overall,m,b,h_star\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const SweepCell& c : cells) {
    const ConditionReport& k = c.conditions;
    os << format_number(c.a1) << ',' << format_number(c.a2) << ',' << format_number(c.p1) << ','
       << format_number(c.p2) << ',' << c.params_valid << ',' << k.p1_gt_2 << ',' << k.b_positive << ','
       << k.contraction << ',' << k.shape_window << ',' << k.x3_positive << ',' << k.overall << ',' << opt(c.m)
       << ',' << opt(c.b) << ',' << opt(c.h_star) << '\n';
  }
}

double spot_check_map_oracle(const SweepReport& report, std::size_t samples, std::uint64_t seed) {
  std::vector<std::size_t> passing;
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    if (report.cells[i].conditions.overall) {
      passing.push_back(i);
    }
  }
  if (passing.empty()) {
    return 0.0;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, passing.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const SweepCell& c = report.cells[passing[pick(rng)]];
    const Params params(c.a1, c.a2, c.p1, c.p2);
    const auto interval = valid_h_interval(params);
    if (!interval) {
      continue;
    }
    // (lo, hi]: map [0, 1) onto it reversed so lo itself is never drawn.
    const double h = interval->hi - unit(rng) * (interval->hi - interval->lo);
    const auto [m, b] = map_slope_intercept(params);
    worst = std::max(worst, std::abs(empirical_map(params, h) - (m * h + b)));
  }
  return worst;
}

bool symmetry_check(const Params& params, int samples, double tolerance) {
  const double h_star = map_coefficients(params).h_star;
  const double horizon = 2.0 * params.period();
  const Trajectory up = solve_exact(params, h_star, horizon);
  const Trajectory down = solve_exact(params, -h_star, horizon);
  for (int i = 0; i < samples; ++i) {
    const double t = samples == 1 ? 0.0 : horizon * i / (samples - 1);
    if (!(std::abs(up.eval(t) + down.eval(t)) <= tolerance)) {
      return false;
    }
  }
  return true;
}

bool ProbeResult::all_pass() const noexcept {
  return std::all_of(pass.begin(), pass.end(), [](bool b) { return b; });
}

ProbeResult openness_probe(const Params& params, double radius, ProbePattern pattern) {
  const std::vector<double> base{params.a1(), params.a2(), params.p1(), params.p2()};
  ProbeResult result;
  if (pattern == ProbePattern::Axes) {
    for (std::size_t k = 0; k < base.size(); ++k) {
      for (double sign : {-1.0, 1.0}) {
        auto p = base;
        p[k] += sign * radius;
        result.points.push_back(p);
      }
    }
  } else {
    for (unsigned mask = 0; mask < 16; ++mask) {
      auto p = base;
      for (std::size_t k = 0; k < base.size(); ++k) {
        p[k] += ((mask >> k) & 1u) ? radius : -radius;
      }
      result.points.push_back(p);
    }
  }
  for (const auto& p : result.points) {
    bool ok = false;
    try {
      ok = check_conditions(Params(p[0], p[1], p[2], p[3])).overall;
    } catch (const InvalidArgument&) {
      ok = false;
    }
    result.pass.push_back(ok);
  }
  return result;
}

}  // namespace dde
