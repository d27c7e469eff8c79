#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bolw {

/// Shortest round-trip decimal form of a double (locale-independent).
std::string format_double(double v);

/// Full-precision parse; nullopt if `s` is not exactly one double.
std::optional<double> parse_double(std::string_view s);

std::optional<std::int64_t> parse_int(std::string_view s);

/// Quotes a CSV field per RFC 4180 when it contains ',', '"' or a newline.
std::string csv_escape(std::string_view field);

/// Splits one CSV line, handling quoted fields.
std::vector<std::string> csv_split(std::string_view line);

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);

} // namespace bolw
