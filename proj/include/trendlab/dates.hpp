#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace trendlab {

/// Calendar date stored as days since 1970-01-01. Cheap to copy and compare;
/// conversion to/from ISO-8601 strings goes through std::chrono.
class Date {
  public:
    Date() : serial_(0) {}
    explicit Date(std::int32_t serial) : serial_(serial) {}
    Date(int year, unsigned month, unsigned day);

    static Date parse_iso(const std::string& text);  // throws Error(MalformedRow-free ctx): std::invalid_argument
    std::string to_iso() const;

    std::int32_t serial() const { return serial_; }
    bool is_weekend() const;
    Date next_business_day() const;

    Date& operator+=(int days) {
        serial_ += days;
        return *this;
    }
    friend Date operator+(Date d, int days) { return Date(d.serial_ + days); }
    friend int operator-(Date a, Date b) { return a.serial_ - b.serial_; }
    auto operator<=>(const Date&) const = default;

    int year() const;
    unsigned month() const;

  private:
    std::int32_t serial_;
};

/// `count` consecutive business days (Mon-Fri) starting at `start`
/// (moved forward to the next business day if it falls on a weekend).
std::vector<Date> business_day_range(Date start, std::size_t count);

}  // namespace trendlab
