#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace tgqa {

enum class Granularity { kYear, kMonth, kDay, kApprox };

// A point on the proleptic Gregorian calendar at year, month or day
// resolution, or an approximate year range ("late 1980s") that only exists so
// extracted expressions can be represented. Approximate points never enter
// duration arithmetic.
//
// Ordering: by year, then month, then day, absent components sorting first.
// Approximate points sort by range midpoint, ties toward the lower bound.
class TimePoint {
 public:
  TimePoint() = default;  // year 1

  static TimePoint ofYear(int year);
  static TimePoint ofMonth(int year, int month);
  static TimePoint ofDay(int year, int month, int day);
  static TimePoint approx(int low, int high);

  // For approximate points this is the lower bound of the range.
  int year() const noexcept { return year_; }
  std::optional<int> month() const noexcept { return month_; }
  std::optional<int> day() const noexcept { return day_; }
  Granularity granularity() const noexcept { return granularity_; }
  std::optional<std::pair<int, int>> approxRange() const;

  bool isYear() const noexcept { return granularity_ == Granularity::kYear; }

  // Same point moved by a whole number of years. Throws NegativeYear when the
  // result would fall at or before year 0.
  TimePoint shiftedYears(int offset) const;

  friend std::strong_ordering operator<=>(const TimePoint& a,
                                          const TimePoint& b) noexcept;
  friend bool operator==(const TimePoint& a, const TimePoint& b) noexcept {
    return (a <=> b) == std::strong_ordering::equal;
  }

 private:
  int year_ = 1;
  std::optional<int> month_;
  std::optional<int> day_;
  int approx_high_ = 0;
  Granularity granularity_ = Granularity::kYear;
};

std::string_view monthName(int month);
int daysInMonth(int year, int month);  // proleptic Gregorian
std::optional<int> monthFromName(std::string_view name);

// Canonical, locale-independent surface: "1942", "June 1994",
// "3 April 1909", "1930s", "late 1980s" or "between 1986 and 1990".
std::string formatTime(const TimePoint& time);

// Inverse of formatTime on its image. Returns nullopt for anything else.
std::optional<TimePoint> parseTime(std::string_view text);

}  // namespace tgqa
