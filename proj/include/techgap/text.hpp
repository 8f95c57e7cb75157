#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace techgap {

/// Calendar date at day resolution.
using Date = std::chrono::sys_days;

/// Parses an ISO `YYYY-MM-DD` date; nullopt on malformed or impossible dates.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date date);
int year_of(Date date);
Date make_date(int year, unsigned month, unsigned day);

/// Unicode case fold followed by whitespace trim/collapse. All term and
/// entity-name matching goes through this.
std::string normalize_term(std::string_view term);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Splits on `sep`, trims each piece, drops empties.
std::vector<std::string> split_list(std::string_view text, char sep = ',');

}  // namespace techgap
