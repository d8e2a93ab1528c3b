#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace finkario {

// Calendar date. Comparable, ISO-8601 text form, ISO week arithmetic.
struct Date {
    int y = 0;
    int m = 0;
    int d = 0;

    auto operator<=>(const Date&) const = default;

    // days since 1970-01-01 (negative before)
    std::int64_t serial() const;
    static Date from_serial(std::int64_t days);

    Date add_days(int n) const { return from_serial(serial() + n); }

    // 1 = Monday ... 7 = Sunday
    int iso_weekday() const;
    // (iso year, iso week number)
    std::pair<int, int> iso_week() const;

    std::string to_string() const;
    static std::optional<Date> parse(std::string_view iso);     // YYYY-MM-DD
    static std::optional<Date> parse_compact(std::string_view); // YYYYMMDD
};

} // namespace finkario
