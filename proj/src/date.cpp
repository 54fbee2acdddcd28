#include "emcopp/date.hpp"

#include <array>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace emcopp {

namespace {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
  int y, m, d;
};

Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), static_cast<int>(m),
          static_cast<int>(d)};
}

bool is_leap(int y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

constexpr std::array<int, 12> kDaysInMonth = {31, 28, 31, 30, 31, 30,
                                              31, 31, 30, 31, 30, 31};
// Cumulative days before each month, non-leap year.
constexpr std::array<int, 12> kCumDays = {0,   31,  59,  90,  120, 151,
                                          181, 212, 243, 273, 304, 334};

}  // namespace

Date::Date(int year, int month, int day) {
  if (month < 1 || month > 12) {
    throw std::invalid_argument("Date: month out of range: " +
                                std::to_string(month));
  }
  int dim = kDaysInMonth[month - 1];
  if (month == 2 && is_leap(year)) dim = 29;
  if (day < 1 || day > dim) {
    throw std::invalid_argument("Date: day out of range: " +
                                std::to_string(day));
  }
  days_ = days_from_civil(year, month, day);
}

Date Date::from_iso(std::string_view s) {
  int y = 0, m = 0, d = 0;
  char trailing = '\0';
  std::string buf(s);
  int n = std::sscanf(buf.c_str(), "%d-%d-%d%c", &y, &m, &d, &trailing);
  if (n != 3) {
    throw std::invalid_argument("Date: expected YYYY-MM-DD, got '" + buf +
                                "'");
  }
  return Date(y, m, d);
}

int Date::year() const { return civil_from_days(days_).y; }
int Date::month() const { return civil_from_days(days_).m; }
int Date::day() const { return civil_from_days(days_).d; }

int Date::day_of_year_365() const {
  const Civil c = civil_from_days(days_);
  if (c.m == 2 && c.d == 29) return 59;
  return kCumDays[c.m - 1] + c.d;
}

std::string Date::to_iso() const {
  const Civil c = civil_from_days(days_);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", c.y, c.m, c.d);
  return buf;
}

int doy_distance_365(int a, int b) {
  int diff = a - b;
  if (diff < 0) diff = -diff;
  return diff <= 365 - diff ? diff : 365 - diff;
}

std::ostream& operator<<(std::ostream& os, Date d) { return os << d.to_iso(); }

}  // namespace emcopp
