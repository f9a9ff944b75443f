#include "pricepanel/calendar.hpp"

#include <cstdio>
#include <stdexcept>

namespace pricepanel {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

struct CivilDate {
  int y;
  int m;
  int d;
};

// Howard Hinnant's civil-from-days algorithm.
CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = floor_div(z, 146097);
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {static_cast<int>(y + (m <= 2)), static_cast<int>(m),
          static_cast<int>(d)};
}

bool is_leap(int y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

int day_of_year(const CivilDate& cd) {
  static const int cum[12] = {0,   31,  59,  90,  120, 151,
                              181, 212, 243, 273, 304, 334};
  int doy = cum[cd.m - 1] + cd.d;
  if (cd.m > 2 && is_leap(cd.y)) ++doy;
  return doy;
}

// ISO weekday 1=Monday .. 7=Sunday; day 0 (1970-01-01) is a Thursday.
int iso_weekday(std::int64_t days) {
  return static_cast<int>(((days + 3) % 7 + 7) % 7) + 1;
}

int iso_weeks_in_year(int y) {
  const int jan1 = iso_weekday(days_from_civil(y, 1, 1));
  return (jan1 == 4 || (is_leap(y) && jan1 == 3)) ? 53 : 52;
}

}  // namespace

std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = floor_div(y, 400);
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

YearMonth unix_to_month(std::int64_t ts) {
  const CivilDate cd = civil_from_days(floor_div(ts, 86400));
  return {cd.y, cd.m};
}

IsoWeek unix_to_week(std::int64_t ts) {
  const std::int64_t days = floor_div(ts, 86400);
  const CivilDate cd = civil_from_days(days);
  const int wd = iso_weekday(days);
  const int week = (day_of_year(cd) - wd + 10) / 7;
  if (week < 1) return {cd.y - 1, iso_weeks_in_year(cd.y - 1)};
  if (week > iso_weeks_in_year(cd.y)) return {cd.y + 1, 1};
  return {cd.y, week};
}

int months_between(YearMonth x, YearMonth y) {
  return 12 * (x.year - y.year) + (x.month - y.month);
}

int assign_bin(int e, EventWindow window) {
  if (!window.contains(e)) {
    throw std::out_of_range("event time outside window: " + std::to_string(e));
  }
  const int q = e >= 0 ? e / 3 : -((-e + 2) / 3);
  return 3 * q;
}

std::string format_month(YearMonth m) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", m.year, m.month);
  return buf;
}

std::optional<YearMonth> parse_month(std::string_view s) {
  if (s.size() != 7 || s[4] != '-') return std::nullopt;
  int y = 0, m = 0;
  for (int i = 0; i < 4; ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    y = y * 10 + (s[i] - '0');
  }
  for (int i = 5; i < 7; ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    m = m * 10 + (s[i] - '0');
  }
  if (m < 1 || m > 12) return std::nullopt;
  return YearMonth{y, m};
}

std::string format_iso_week(IsoWeek w) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-W%02d", w.year, w.week);
  return buf;
}

}  // namespace pricepanel
