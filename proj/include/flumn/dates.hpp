#pragma once

#include <compare>
#include <string>

namespace flumn {

// Proleptic Gregorian calendar date.  Serial day 0 is 1970-01-01.
struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  static bool valid(int y, int m, int d);
  static Date from_serial(long long serial);
  // Parses strict "YYYY-MM-DD"; throws ValidationError otherwise.
  static Date parse(const std::string& text);

  long long serial() const;
  Date plus_days(long long n) const;
  // Day-of-week slot 1..7 with 1 = Sunday.
  int day_of_week() const;
  std::string to_string() const;

  friend auto operator<=>(const Date&, const Date&) = default;
};

// Whole days from a to b (b - a).
long long days_between(const Date& a, const Date& b);

}  // namespace flumn
