#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace bolw {

// Timestamps are UTC seconds since the Unix epoch, second resolution.
// All calendar math is proleptic Gregorian and timezone-free.

/// Parses "YYYY-MM-DDTHH:MM:SSZ" or a bare date "YYYY-MM-DD" (midnight).
std::optional<std::int64_t> parse_utc(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_utc(std::int64_t utc_seconds);

/// Days since 1970-01-01 for a civil date.
std::int64_t days_from_civil(int year, unsigned month, unsigned day);

struct CivilDate {
    int year;
    unsigned month;
    unsigned day;
};
CivilDate civil_from_days(std::int64_t days);

/// ISO-8601 weekday, Monday = 1 .. Sunday = 7.
int iso_weekday(std::int64_t days);

struct IsoWeek {
    int year; // ISO week-based year, may differ from the civil year
    int week; // 1..53

    friend auto operator<=>(const IsoWeek&, const IsoWeek&) = default;
};
IsoWeek iso_week(std::int64_t days);

/// UTC seconds at Monday 00:00:00 of the given ISO week.
std::int64_t iso_week_start(IsoWeek wk);

/// Floor division (quotient rounded toward negative infinity).
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

} // namespace bolw
