#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace netpanel {

using Date = std::chrono::year_month_day;

/// Parses an ISO `YYYY-MM-DD` date. Throws ValidationError on malformed or
/// non-existent calendar dates.
Date parse_date(std::string_view text);

std::string format_date(const Date& date);

/// Signed day count between two dates (b - a).
long days_between(const Date& a, const Date& b);

/// Earliest representable date; used as the open start of the first window
/// of a weight sequence.
inline constexpr Date kDawnOfTime{std::chrono::year{1}, std::chrono::month{1}, std::chrono::day{1}};

} // namespace netpanel
