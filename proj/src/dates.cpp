#include "flumn/dates.hpp"

#include <array>
#include <cstdio>

#include "flumn/common.hpp"

namespace flumn {

namespace {

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30,
                                                31, 31, 30, 31, 30, 31};
  if (m == 2 && leap(y)) return 29;
  return kDays[static_cast<size_t>(m - 1)];
}

// Days from 1970-01-01 to y-m-d (proleptic Gregorian).
long long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

void civil_from_days(long long z, int& y, int& m, int& d) {
  z += 719468;
  const long long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long long yy = static_cast<long long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

bool Date::valid(int y, int m, int d) {
  if (y < 1 || y > 9999) return false;
  if (m < 1 || m > 12) return false;
  return d >= 1 && d <= days_in_month(y, m);
}

Date Date::from_serial(long long serial) {
  Date out;
  civil_from_days(serial, out.year, out.month, out.day);
  return out;
}

Date Date::parse(const std::string& text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-')
    throw ValidationError("bad date '" + text + "' (expected YYYY-MM-DD)");
  for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (text[i] < '0' || text[i] > '9')
      throw ValidationError("bad date '" + text + "' (expected YYYY-MM-DD)");
  int y = std::stoi(text.substr(0, 4));
  int m = std::stoi(text.substr(5, 2));
  int d = std::stoi(text.substr(8, 2));
  if (!valid(y, m, d)) throw ValidationError("bad date '" + text + "' (no such day)");
  return Date{y, m, d};
}

long long Date::serial() const { return days_from_civil(year, month, day); }

Date Date::plus_days(long long n) const { return from_serial(serial() + n); }

int Date::day_of_week() const {
  // Serial 0 = 1970-01-01, a Thursday; slot 1 = Sunday.
  long long s = serial();
  return static_cast<int>(((s % 7) + 11) % 7) + 1;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

long long days_between(const Date& a, const Date& b) { return b.serial() - a.serial(); }

}  // namespace flumn
