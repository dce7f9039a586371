#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dde::cli {

/// Reader for the run-configuration subset of TOML: [table] headers and
/// key = value lines, where a value is a number, a quoted string, a boolean
/// or a flat array of numbers. Comments start with '#'.
class Config {
public:
  using Value = std::variant<double, bool, std::string, std::vector<double>>;

  /// Throws dde::InvalidArgument naming the offending line.
  static Config parse(std::istream& is);
  static Config load(const std::filesystem::path& path);

  std::optional<double> number(const std::string& table, const std::string& key) const;
  std::optional<std::string> string(const std::string& table, const std::string& key) const;
  std::optional<std::vector<double>> numbers(const std::string& table, const std::string& key) const;

  bool empty() const noexcept { return values_.empty(); }

private:
  const Value* find(const std::string& table, const std::string& key) const;

  std::map<std::string, Value> values_;  // keyed "table.key"
};

}  // namespace dde::cli
