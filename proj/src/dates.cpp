#include "streamflow/dates.hpp"

#include <charconv>
#include <cstdio>

#include "streamflow/errors.hpp"

namespace streamflow {
namespace {

int parse_field(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
    int value = 0;
    if (pos + len > text.size()) throw DataError("malformed date/time '" + std::string(whole) + "'");
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
    if (ec != std::errc{} || ptr != text.data() + pos + len) {
        throw DataError("malformed date/time '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace

Date Date::parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw DataError("malformed date '" + std::string(text) + "' (expected YYYY-MM-DD)");
    }
    const int y = parse_field(text, 0, 4, text);
    const int m = parse_field(text, 5, 2, text);
    const int d = parse_field(text, 8, 2, text);
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                          std::chrono::day{unsigned(d)}};
    if (!ymd.ok()) throw DataError("invalid calendar date '" + std::string(text) + "'");
    return Date{std::chrono::sys_days{ymd}};
}

std::string Date::to_string() const {
    const std::chrono::year_month_day ymd{day_};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

std::int64_t parse_timestamp(std::string_view text) {
    if (text.size() < 16 || (text[10] != ' ' && text[10] != 'T') || text[13] != ':') {
        throw DataError("malformed timestamp '" + std::string(text) + "'");
    }
    const Date day = Date::parse(text.substr(0, 10));
    const int hh = parse_field(text, 11, 2, text);
    const int mm = parse_field(text, 14, 2, text);
    int ss = 0;
    if (text.size() > 16) {
        if (text.size() != 19 || text[16] != ':') {
            throw DataError("malformed timestamp '" + std::string(text) + "'");
        }
        ss = parse_field(text, 17, 2, text);
    }
    if (hh > 23 || mm > 59 || ss > 59) throw DataError("invalid time of day in '" + std::string(text) + "'");
    return day.serial() * 86400 + hh * 3600 + mm * 60 + ss;
}

std::string format_timestamp(std::int64_t seconds) {
    std::int64_t day = seconds / 86400;
    std::int64_t rem = seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --day;
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, " %02d:%02d:%02d", int(rem / 3600), int(rem / 60 % 60), int(rem % 60));
    return Date{std::chrono::sys_days{std::chrono::days{day}}}.to_string() + buf;
}

}  // namespace streamflow
