#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mcsadapt::csv {

/// Splits one line on commas. Double-quoted fields may contain commas and
/// escaped quotes (""). Trailing '\r' is dropped.
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field if it contains a comma, quote or newline.
std::string quote(std::string_view field);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);
/// Accepts 1/0, true/false (case-insensitive).
std::optional<bool> parse_bool(std::string_view s);

/// Shortest representation that round-trips to the same double.
std::string format_double(double v);

std::string trim(std::string_view s);

}  // namespace mcsadapt::csv
