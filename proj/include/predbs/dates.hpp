#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace predbs {

using Date = std::chrono::sys_days;

/// Strict ISO-8601 calendar date, `YYYY-MM-DD`. Returns nullopt on anything
/// else, including impossible dates such as 2015-02-30.
std::optional<Date> parse_iso_date(std::string_view text);

std::string format_iso_date(Date d);

/// ACT/365 year fraction between two dates (negative if `to` precedes `from`).
double act365_years(Date from, Date to);

}  // namespace predbs
