#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace dde {

using Json = nlohmann::ordered_json;

/// Fixed float formatting for all CSV and JSON output: 15 significant digits.
std::string format_number(double v);

/// v rounded to 15 significant digits, so that JSON serialization is stable.
double round15(double v);

/// JSON number rounded to 15 significant digits; null for NaN or infinity.
Json json_number(double v);

std::string dump_json(const Json& j);

/// Writes to a sibling temporary file and renames it over `path`, so that a
/// failed run leaves no partial output.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace dde
