#include "trendlab/dates.hpp"

#include <charconv>
#include <stdexcept>

namespace trendlab {

namespace {

namespace chr = std::chrono;

chr::year_month_day to_ymd(std::int32_t serial) {
    return chr::year_month_day{chr::sys_days{chr::days{serial}}};
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
    chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
    if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
    serial_ = static_cast<std::int32_t>(chr::sys_days{ymd}.time_since_epoch().count());
}

Date Date::parse_iso(const std::string& text) {
    // YYYY-MM-DD, no other shapes accepted
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw std::invalid_argument("expected YYYY-MM-DD, got '" + text + "'");
    auto parse_int = [&](int begin, int end) {
        int value = 0;
        auto [p, ec] = std::from_chars(text.data() + begin, text.data() + end, value);
        if (ec != std::errc{} || p != text.data() + end)
            throw std::invalid_argument("expected YYYY-MM-DD, got '" + text + "'");
        return value;
    };
    return Date(parse_int(0, 4), static_cast<unsigned>(parse_int(5, 7)),
                static_cast<unsigned>(parse_int(8, 10)));
}

std::string Date::to_iso() const {
    auto ymd = to_ymd(serial_);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

bool Date::is_weekend() const {
    chr::weekday wd{chr::sys_days{chr::days{serial_}}};
    return wd == chr::Saturday || wd == chr::Sunday;
}

Date Date::next_business_day() const {
    Date d(serial_ + 1);
    while (d.is_weekend()) d += 1;
    return d;
}

int Date::year() const { return static_cast<int>(to_ymd(serial_).year()); }

unsigned Date::month() const { return static_cast<unsigned>(to_ymd(serial_).month()); }

std::vector<Date> business_day_range(Date start, std::size_t count) {
    std::vector<Date> out;
    out.reserve(count);
    Date d = start.is_weekend() ? start.next_business_day() : start;
    while (out.size() < count) {
        out.push_back(d);
        d = d.next_business_day();
    }
    return out;
}

}  // namespace trendlab
