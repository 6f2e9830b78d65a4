#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace kfrev {

/// Calendar date with day resolution.
using Date = std::chrono::sys_days;

/// Parses `YYYY-MM-DD`. Returns nullopt for malformed text or impossible dates.
std::optional<Date> parse_date(std::string_view text);

/// Like parse_date but throws std::invalid_argument naming the offending text.
Date parse_date_or_throw(std::string_view text);

std::string format_date(Date date);

/// Seconds since the Unix epoch at 00:00 UTC of `date`.
std::int64_t to_unix_seconds(Date date);

}  // namespace kfrev
