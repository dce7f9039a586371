#include "config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "dde/errors.hpp"

namespace dde::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') {
      quoted = !quoted;
    } else if (line[i] == '#' && !quoted) {
      return line.substr(0, i);
    }
  }
  return line;
}

bool bare_key(const std::string& s) {
  if (s.empty()) {
    return false;
  }
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
      return false;
    }
  }
  return true;
}

double to_number(const std::string& text, int line_no) {
  std::string s;
  for (char c : trim(text)) {
    if (c != '_') {
      s.push_back(c);
    }
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size()) {
    throw InvalidArgument("config line " + std::to_string(line_no) + ": unsupported value '" + text + "'");
  }
  return v;
}

Config::Value parse_value(const std::string& raw, int line_no) {
  const std::string v = trim(raw);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    return v.substr(1, v.size() - 2);
  }
  if (v == "true" || v == "false") {
    return v == "true";
  }
  if (v.size() >= 2 && v.front() == '[' && v.back() == ']') {
    std::vector<double> out;
    std::stringstream ss(v.substr(1, v.size() - 2));
    for (std::string item; std::getline(ss, item, ',');) {
      if (!trim(item).empty()) {
        out.push_back(to_number(item, line_no));
      }
    }
    return out;
  }
  return to_number(v, line_no);
}

}  // namespace

Config Config::parse(std::istream& is) {
  Config cfg;
  std::string table;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw InvalidArgument("config line " + std::to_string(line_no) + ": malformed table header");
      }
      table = trim(line.substr(1, line.size() - 2));
      if (!bare_key(table)) {
        throw InvalidArgument("config line " + std::to_string(line_no) + ": unsupported table name");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!bare_key(key)) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": unsupported key '" + key + "'");
    }
    const std::string full = table.empty() ? key : table + "." + key;
    if (cfg.values_.count(full) != 0) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": duplicate key '" + full + "'");
    }
    cfg.values_.emplace(full, parse_value(line.substr(eq + 1), line_no));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidArgument("cannot read config file " + path.string());
  }
  return parse(in);
}

const Config::Value* Config::find(const std::string& table, const std::string& key) const {
  const auto it = values_.find(table + "." + key);
  return it == values_.end() ? nullptr : &it->second;
}

std::optional<double> Config::number(const std::string& table, const std::string& key) const {
  const Value* v = find(table, key);
  if (v == nullptr) {
    return std::nullopt;
  }
  if (const auto* d = std::get_if<double>(v)) {
    return *d;
  }
  throw InvalidArgument("config key " + table + "." + key + " must be a number");
}

std::optional<std::string> Config::string(const std::string& table, const std::string& key) const {
  const Value* v = find(table, key);
  if (v == nullptr) {
    return std::nullopt;
  }
  if (const auto* s = std::get_if<std::string>(v)) {
    return *s;
  }
  throw InvalidArgument("config key " + table + "." + key + " must be a string");
}

std::optional<std::vector<double>> Config::numbers(const std::string& table, const std::string& key) const {
  const Value* v = find(table, key);
  if (v == nullptr) {
    return std::nullopt;
  }
  if (const auto* a = std::get_if<std::vector<double>>(v)) {
    return *a;
  }
  if (const auto* d = std::get_if<double>(v)) {
    return std::vector<double>{*d};
  }
  throw InvalidArgument("config key " + table + "." + key + " must be an array of numbers");
}

}  // namespace dde::cli
