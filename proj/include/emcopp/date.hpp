#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace emcopp {

// Proleptic Gregorian calendar date with day granularity, stored as days
// since 1970-01-01. Intra-day cycles (e.g. 1200 UTC) are configuration
// metadata, not part of the key.
class Date {
 public:
  Date() = default;
  Date(int year, int month, int day);

  static Date from_days(std::int64_t days) {
    Date d;
    d.days_ = days;
    return d;
  }
  // Parses "YYYY-MM-DD"; throws std::invalid_argument on malformed input.
  static Date from_iso(std::string_view s);

  std::int64_t days_since_epoch() const { return days_; }
  int year() const;
  int month() const;
  int day() const;

  // Day of year in a 365-day convention: Feb 29 maps onto day 59 (same as
  // Feb 28), so the result is always in 1..365.
  int day_of_year_365() const;

  std::string to_iso() const;

  Date operator+(std::int64_t days) const { return from_days(days_ + days); }
  Date operator-(std::int64_t days) const { return from_days(days_ - days); }
  std::int64_t operator-(Date other) const { return days_ - other.days_; }

  auto operator<=>(const Date&) const = default;

 private:
  std::int64_t days_ = 0;
};

// Circular distance between two day-of-year values on the 365-day wheel.
int doy_distance_365(int a, int b);

std::ostream& operator<<(std::ostream& os, Date d);

}  // namespace emcopp
