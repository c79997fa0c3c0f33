#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace streamflow {

/// Calendar day. Thin value wrapper around `std::chrono::sys_days`.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days day) : day_(day) {}
    constexpr Date(int year, unsigned month, unsigned day)
        : day_(std::chrono::year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                           std::chrono::day{day}}) {}

    /// Parses `YYYY-MM-DD`. Throws DataError on malformed or impossible dates.
    static Date parse(std::string_view text);

    std::string to_string() const;
    constexpr std::chrono::sys_days sys_days() const { return day_; }
    constexpr std::int64_t serial() const { return day_.time_since_epoch().count(); }

    constexpr Date operator+(std::int64_t days) const {
        return Date{day_ + std::chrono::days{days}};
    }
    constexpr Date operator-(std::int64_t days) const {
        return Date{day_ - std::chrono::days{days}};
    }
    constexpr std::int64_t operator-(Date other) const {
        return (day_ - other.day_).count();
    }
    constexpr auto operator<=>(const Date&) const = default;

private:
    std::chrono::sys_days day_{};
};

/// Half-open interval of days, [start, end).
struct DateRange {
    Date start;
    Date end;

    constexpr std::int64_t days() const { return end - start; }
    constexpr bool contains(Date d) const { return start <= d && d < end; }
    constexpr bool overlaps(const DateRange& other) const {
        return start < other.end && other.start < end;
    }
    constexpr bool operator==(const DateRange&) const = default;
};

/// Parses `YYYY-MM-DD HH:MM[:SS]` (or with a `T` separator) as UTC seconds since epoch.
std::int64_t parse_timestamp(std::string_view text);
std::string format_timestamp(std::int64_t seconds);

}  // namespace streamflow
