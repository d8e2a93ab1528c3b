#include "finkario/date.hpp"

#include <charconv>
#include <cstdio>

namespace finkario {

namespace {

// Howard Hinnant's civil calendar algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

bool parse_int(std::string_view s, int& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

bool valid_ymd(int y, int m, int d) {
    if (m < 1 || m > 12 || d < 1 || d > 31) return false;
    Date check = Date::from_serial(days_from_civil(y, m, d));
    return check.y == y && check.m == m && check.d == d;
}

} // namespace

std::int64_t Date::serial() const { return days_from_civil(y, m, d); }

Date Date::from_serial(std::int64_t days) {
    Date out;
    civil_from_days(days, out.y, out.m, out.d);
    return out;
}

int Date::iso_weekday() const {
    // 1970-01-01 was a Thursday.
    std::int64_t s = serial();
    int wd = static_cast<int>(((s % 7) + 7 + 3) % 7) + 1;
    return wd;
}

std::pair<int, int> Date::iso_week() const {
    // The Thursday of a date's week determines its ISO year.
    Date thursday = add_days(4 - iso_weekday());
    std::int64_t jan1 = days_from_civil(thursday.y, 1, 1);
    int week = static_cast<int>((thursday.serial() - jan1) / 7) + 1;
    return {thursday.y, week};
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

std::optional<Date> Date::parse(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    int y, m, d;
    if (!parse_int(iso.substr(0, 4), y) || !parse_int(iso.substr(5, 2), m) ||
        !parse_int(iso.substr(8, 2), d))
        return std::nullopt;
    if (!valid_ymd(y, m, d)) return std::nullopt;
    return Date{y, m, d};
}

std::optional<Date> Date::parse_compact(std::string_view s) {
    if (s.size() != 8) return std::nullopt;
    int y, m, d;
    if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(4, 2), m) ||
        !parse_int(s.substr(6, 2), d))
        return std::nullopt;
    if (!valid_ymd(y, m, d)) return std::nullopt;
    return Date{y, m, d};
}

} // namespace finkario
