#include "tgqa/time_point.hpp"

#include <array>
#include <charconv>
#include <tuple>

#include "tgqa/error.hpp"
#include "tgqa/text.hpp"

namespace tgqa {
namespace {

constexpr std::array<std::string_view, 12> kMonths = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

void checkYear(int year) {
  if (year < 1) {
    throw Error(ErrorCode::kInvalidTime,
                "year must be positive, got " + std::to_string(year));
  }
}

std::optional<int> parseYearToken(std::string_view token) {
  if (token.empty() || token.size() > 6) return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || value < 1) {
    return std::nullopt;
  }
  // Reject leading zeros so the surface is canonical.
  if (token.front() == '0') return std::nullopt;
  return value;
}

bool isLeap(int year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

auto sortKey(const TimePoint& t) {
  if (auto range = t.approxRange()) {
    return std::make_tuple(range->first + range->second, range->first, 0, 0, 1,
                           range->second);
  }
  return std::make_tuple(2 * t.year(), t.year(), t.month().value_or(0),
                         t.day().value_or(0), 0, t.year());
}

}  // namespace

int daysInMonth(int year, int month) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && isLeap(year)) return 29;
  return kDays[month - 1];
}

TimePoint TimePoint::ofYear(int year) {
  checkYear(year);
  TimePoint t;
  t.year_ = year;
  t.granularity_ = Granularity::kYear;
  return t;
}

TimePoint TimePoint::ofMonth(int year, int month) {
  checkYear(year);
  if (month < 1 || month > 12) {
    throw Error(ErrorCode::kInvalidTime, "month out of range: " + std::to_string(month));
  }
  TimePoint t;
  t.year_ = year;
  t.month_ = month;
  t.granularity_ = Granularity::kMonth;
  return t;
}

TimePoint TimePoint::ofDay(int year, int month, int day) {
  TimePoint t = ofMonth(year, month);
  if (day < 1 || day > daysInMonth(year, month)) {
    throw Error(ErrorCode::kInvalidTime, "day out of range: " + std::to_string(day));
  }
  t.day_ = day;
  t.granularity_ = Granularity::kDay;
  return t;
}

TimePoint TimePoint::approx(int low, int high) {
  checkYear(low);
  if (low > high) {
    throw Error(ErrorCode::kInvalidTime, "approximate range is inverted");
  }
  TimePoint t;
  t.year_ = low;
  t.approx_high_ = high;
  t.granularity_ = Granularity::kApprox;
  return t;
}

std::optional<std::pair<int, int>> TimePoint::approxRange() const {
  if (granularity_ != Granularity::kApprox) return std::nullopt;
  return std::make_pair(year_, approx_high_);
}

TimePoint TimePoint::shiftedYears(int offset) const {
  if (year_ + offset < 1) {
    throw Error(ErrorCode::kNegativeYear,
                "shifting " + formatTime(*this) + " by " + std::to_string(offset) +
                    " leaves the calendar");
  }
  TimePoint t = *this;
  t.year_ += offset;
  // 29 February lands on the 28th in a common year.
  if (day_ && *day_ > daysInMonth(t.year_, *month_)) t.day_ = daysInMonth(t.year_, *month_);
  if (granularity_ == Granularity::kApprox) t.approx_high_ += offset;
  return t;
}

std::strong_ordering operator<=>(const TimePoint& a, const TimePoint& b) noexcept {
  return sortKey(a) <=> sortKey(b);
}

std::string_view monthName(int month) {
  return kMonths.at(static_cast<std::size_t>(month - 1));
}

std::optional<int> monthFromName(std::string_view name) {
  const std::string lower = toLower(name);
  for (std::size_t i = 0; i < kMonths.size(); ++i) {
    const std::string full = toLower(kMonths[i]);
    if (lower == full) return static_cast<int>(i) + 1;
    if (lower.size() >= 3 && full.starts_with(lower)) return static_cast<int>(i) + 1;
    if (lower == "sept" && i == 8) return 9;
  }
  return std::nullopt;
}

std::string formatTime(const TimePoint& time) {
  switch (time.granularity()) {
    case Granularity::kYear:
      return std::to_string(time.year());
    case Granularity::kMonth:
      return std::string(monthName(*time.month())) + " " + std::to_string(time.year());
    case Granularity::kDay:
      return std::to_string(*time.day()) + " " + std::string(monthName(*time.month())) +
             " " + std::to_string(time.year());
    case Granularity::kApprox: {
      const auto [low, high] = *time.approxRange();
      if (low % 10 == 0) {
        if (high == low + 9) return std::to_string(low) + "s";
        if (high == low + 3) return "early " + std::to_string(low) + "s";
      }
      if (low % 10 == 4 && high == low + 2) return "mid " + std::to_string(low - 4) + "s";
      if (low % 10 == 7 && high == low + 2) return "late " + std::to_string(low - 7) + "s";
      return "between " + std::to_string(low) + " and " + std::to_string(high);
    }
  }
  return {};
}

std::optional<TimePoint> parseTime(std::string_view text) {
  const auto words = splitWords(text);
  auto decade = [](std::string_view w) -> std::optional<int> {
    if (w.size() < 2 || w.back() != 's') return std::nullopt;
    auto y = parseYearToken(w.substr(0, w.size() - 1));
    if (!y || *y % 10 != 0) return std::nullopt;
    return y;
  };
  switch (words.size()) {
    case 1: {
      if (auto y = parseYearToken(words[0])) return TimePoint::ofYear(*y);
      if (auto d = decade(words[0])) return TimePoint::approx(*d, *d + 9);
      return std::nullopt;
    }
    case 2: {
      if (auto d = decade(words[1])) {
        if (words[0] == "early") return TimePoint::approx(*d, *d + 3);
        if (words[0] == "mid") return TimePoint::approx(*d + 4, *d + 6);
        if (words[0] == "late") return TimePoint::approx(*d + 7, *d + 9);
        return std::nullopt;
      }
      auto y = parseYearToken(words[1]);
      if (!y) return std::nullopt;
      for (int m = 1; m <= 12; ++m) {
        if (words[0] == monthName(m)) return TimePoint::ofMonth(*y, m);
      }
      return std::nullopt;
    }
    case 3: {
      auto day = parseYearToken(words[0]);
      auto y = parseYearToken(words[2]);
      if (!day || !y) return std::nullopt;
      for (int m = 1; m <= 12; ++m) {
        if (words[1] != monthName(m)) continue;
        if (*day > daysInMonth(*y, m)) return std::nullopt;
        return TimePoint::ofDay(*y, m, *day);
      }
      return std::nullopt;
    }
    case 4: {
      if (words[0] != "between" || words[2] != "and") return std::nullopt;
      auto low = parseYearToken(words[1]);
      auto high = parseYearToken(words[3]);
      if (!low || !high || *low > *high) return std::nullopt;
      return TimePoint::approx(*low, *high);
    }
    default:
      return std::nullopt;
  }
}

}  // namespace tgqa
