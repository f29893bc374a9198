#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace seqcomp::csv {

/// Splits one CSV record. Double-quoted fields may contain commas; "" is an escaped quote.
std::vector<std::string> split(std::string_view line);

/// Quotes a field when it contains a comma, quote or leading/trailing space.
std::string quote(std::string_view field);

std::string_view trim(std::string_view text);

/// Locale-independent decimal parse of the whole (trimmed) field.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

/// Shortest round-trippable-enough form with 9 significant digits ("%.9g").
std::string format9(double value);

/// Fixed precision used in JSON/CSV reports.
std::string format_fixed(double value, int digits);

}  // namespace seqcomp::csv
