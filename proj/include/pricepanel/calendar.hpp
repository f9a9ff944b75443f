#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pricepanel {

// Calendar month in UTC, ordered year-major.
struct YearMonth {
  int year = 1970;
  int month = 1;  // 1..12
  auto operator<=>(const YearMonth&) const = default;
};

// ISO-8601 week date: week-based year plus week number 1..53.
struct IsoWeek {
  int year = 1970;
  int week = 1;
  auto operator<=>(const IsoWeek&) const = default;
};

// Inclusive event-time window in months around the base month.
struct EventWindow {
  int lo = -24;
  int hi = 36;
  bool contains(int e) const { return e >= lo && e <= hi; }
};

// Calendar month containing the Unix timestamp (UTC).
YearMonth unix_to_month(std::int64_t ts);

// ISO week containing the Unix timestamp (UTC). Carried as metadata only.
IsoWeek unix_to_week(std::int64_t ts);

// 12*(x.year - y.year) + (x.month - y.month).
int months_between(YearMonth x, YearMonth y);

// 3-month bin, floor toward -inf: 3*floor(e/3). Throws std::out_of_range
// when e is outside the window.
int assign_bin(int e, EventWindow window = EventWindow{});

std::string format_month(YearMonth m);  // "2022-02"
std::optional<YearMonth> parse_month(std::string_view s);
std::string format_iso_week(IsoWeek w);  // "2020-W01"

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d);

}  // namespace pricepanel
