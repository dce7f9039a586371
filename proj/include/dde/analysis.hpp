#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dde/model.hpp"
#include "dde/report.hpp"
#include "dde/return_map.hpp"

namespace dde {

struct TableRow {
  double a1;
  double a2;
  double p1;
  double p2;
  double h_star_expected;
  double period_expected;
  bool exact = false;  // expected fixed point given as an exact fraction
};

/// Parameter sets with published stable periodic orbits and their fixed
/// points (two rounded to two decimals, two given as fractions).
std::vector<TableRow> reference_table();

inline constexpr double kRoundedTableTolerance = 0.005;
inline constexpr double kExactTableTolerance = 1e-12;
inline constexpr double kReturnTolerance = 1e-10;

struct RowCheck {
  std::size_t index = 0;
  TableRow row{};
  ConditionReport conditions;
  std::optional<double> h_star;
  double h_star_error = 0.0;
  double h_star_tolerance = 0.0;
  double return_error = 0.0;  // |x(T) - h*| from constant history h*
  double period_error = 0.0;
  std::vector<std::string> failures;

  bool pass() const noexcept { return failures.empty(); }
};

struct TableReport {
  std::vector<RowCheck> rows;

  bool all_pass() const noexcept;
  Json to_json() const;
};

/// Checks every row; failures are reported per row, never thrown.
TableReport verify_table(std::span<const TableRow> rows);

/// Reads rows from CSV with header a1,a2,p1,p2,h_star,T. Fixed points may be
/// written as fractions n/d, which marks the row exact.
std::vector<TableRow> read_table_csv(std::istream& is);

struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  int count = 1;

  double value(int k) const noexcept;
  static Axis fixed(double v) noexcept { return {v, v, 1}; }
};

/// Parses "lo:hi:count" (or a single value). Throws InvalidArgument.
Axis parse_axis(const std::string& spec);

struct SweepAxes {
  Axis a1;
  Axis a2;
  Axis p1;
  Axis p2;

  static SweepAxes around(const Params& p) noexcept;

  /// Sets the axis named a1, a2, p1 or p2; throws InvalidArgument otherwise.
  void set(const std::string& name, const Axis& axis);
  std::size_t cell_count() const noexcept;
};

struct SweepCell {
  double a1;
  double a2;
  double p1;
  double p2;
  bool params_valid = false;
  ConditionReport conditions;
  std::optional<double> m;
  std::optional<double> b;
  std::optional<double> h_star;  // only where every condition holds
};

struct SweepReport {
  SweepAxes axes;
  std::vector<SweepCell> cells;  // a1 outermost, p2 innermost

  Json to_json() const;
  void write_csv(std::ostream& os) const;
};

SweepReport sweep(const SweepAxes& axes, unsigned jobs = 1);

/// Largest |empirical_map(h) - (m h + b)| over `samples` random passing
/// cells and random h in each cell's valid interval. Zero when no cell passes.
double spot_check_map_oracle(const SweepReport& report, std::size_t samples, std::uint64_t seed);

/// Solutions from -h* and h* are negatives of each other at `samples`
/// points of [0, 2T].
bool symmetry_check(const Params& params, int samples = 1000, double tolerance = 1e-10);

enum class ProbePattern {
  Axes,    // +-radius along each parameter: 8 points
  Corners  // every corner of the hypercube: 16 points
};

struct ProbeResult {
  std::vector<std::vector<double>> points;  // (a1, a2, p1, p2)
  std::vector<bool> pass;

  bool all_pass() const noexcept;
};

ProbeResult openness_probe(const Params& params, double radius = 0.01, ProbePattern pattern = ProbePattern::Axes);

}  // namespace dde
