#include "bolw/timeutil.hpp"

#include <cstdio>

namespace bolw {

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);            // [0, 399]
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;  // [0, 365]
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;           // [0, 146096]
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int>(y + (m <= 2)), m, d};
}

int iso_weekday(std::int64_t days) {
    // 1970-01-01 was a Thursday (ISO weekday 4).
    std::int64_t w = (days + 3) % 7;
    if (w < 0) w += 7;
    return static_cast<int>(w) + 1;
}

IsoWeek iso_week(std::int64_t days) {
    // The ISO week of a date is determined by the Thursday of its week.
    const std::int64_t thursday = days - (iso_weekday(days) - 1) + 3;
    const CivilDate cd = civil_from_days(thursday);
    const std::int64_t jan1 = days_from_civil(cd.year, 1, 1);
    const int week = static_cast<int>((thursday - jan1) / 7) + 1;
    return IsoWeek{cd.year, week};
}

std::int64_t iso_week_start(IsoWeek wk) {
    // Week 1 is the week containing January 4th.
    const std::int64_t jan4 = days_from_civil(wk.year, 1, 4);
    const std::int64_t week1_monday = jan4 - (iso_weekday(jan4) - 1);
    return (week1_monday + static_cast<std::int64_t>(wk.week - 1) * 7) * 86400;
}

namespace {

bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        char c = s[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

} // namespace

std::optional<std::int64_t> parse_utc(std::string_view s) {
    int year, month, day;
    if (s.size() != 10 && s.size() != 20) return std::nullopt;
    if (!parse_fixed_uint(s, 0, 4, year) || s[4] != '-' ||
        !parse_fixed_uint(s, 5, 2, month) || s[7] != '-' ||
        !parse_fixed_uint(s, 8, 2, day))
        return std::nullopt;
    if (month < 1 || month > 12 || day < 1 || day > 31) return std::nullopt;

    int hh = 0, mm = 0, ss = 0;
    if (s.size() == 20) {
        if (s[10] != 'T' || s[13] != ':' || s[16] != ':' || s[19] != 'Z') return std::nullopt;
        if (!parse_fixed_uint(s, 11, 2, hh) || !parse_fixed_uint(s, 14, 2, mm) ||
            !parse_fixed_uint(s, 17, 2, ss))
            return std::nullopt;
        if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    }

    // Reject dates like February 30th: round-trip must reproduce the input.
    const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month),
                                              static_cast<unsigned>(day));
    const CivilDate back = civil_from_days(days);
    if (back.year != year || back.month != static_cast<unsigned>(month) ||
        back.day != static_cast<unsigned>(day))
        return std::nullopt;

    return days * 86400 + hh * 3600 + mm * 60 + ss;
}

std::string format_utc(std::int64_t t) {
    const std::int64_t days = floor_div(t, 86400);
    std::int64_t rem = t - days * 86400;
    const CivilDate cd = civil_from_days(days);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", cd.year, cd.month,
                  cd.day, static_cast<long long>(rem / 3600),
                  static_cast<long long>(rem / 60 % 60), static_cast<long long>(rem % 60));
    return buf;
}

} // namespace bolw
