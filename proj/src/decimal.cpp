#include "pricepanel/decimal.hpp"

#include <cfenv>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace pricepanel {

std::optional<Decimal> Decimal::parse(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::size_t i = 0;
  bool neg = false;
  if (s[i] == '+' || s[i] == '-') {
    neg = s[i] == '-';
    ++i;
  }
  if (i >= s.size()) return std::nullopt;

  constexpr std::int64_t kMaxWhole =
      std::numeric_limits<std::int64_t>::max() / kOne - 1;
  std::int64_t whole = 0;
  bool any_digit = false;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
    whole = whole * 10 + (s[i] - '0');
    if (whole > kMaxWhole) return std::nullopt;
    any_digit = true;
    ++i;
  }
  std::int64_t frac = 0;
  if (i < s.size() && s[i] == '.') {
    ++i;
    int digits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
      if (++digits > kFracDigits) return std::nullopt;
      frac = frac * 10 + (s[i] - '0');
      any_digit = true;
      ++i;
    }
    for (; digits < kFracDigits; ++digits) frac *= 10;
  }
  if (!any_digit || i != s.size()) return std::nullopt;
  const std::int64_t micros = whole * kOne + frac;
  return from_micros(neg ? -micros : micros);
}

Decimal Decimal::from_double(double x) {
  // nearbyint honours the default round-to-nearest-even mode.
  return from_micros(static_cast<std::int64_t>(
      std::nearbyint(x * static_cast<double>(kOne))));
}

Decimal Decimal::mean(std::span<const Decimal> values) {
  if (values.empty()) return Decimal{};
  __int128 sum = 0;
  for (const Decimal& v : values) sum += v.micros();
  const __int128 n = static_cast<__int128>(values.size());
  const bool neg = sum < 0;
  const __int128 mag = neg ? -sum : sum;
  __int128 q = mag / n;
  const __int128 r = mag % n;
  const __int128 twice = 2 * r;
  if (twice > n || (twice == n && (q & 1) != 0)) ++q;
  const std::int64_t out = static_cast<std::int64_t>(q);
  return from_micros(neg ? -out : out);
}

std::string Decimal::str() const {
  const bool neg = micros_ < 0;
  const std::uint64_t mag =
      neg ? 0ull - static_cast<std::uint64_t>(micros_)
          : static_cast<std::uint64_t>(micros_);
  const std::uint64_t whole = mag / kOne;
  std::uint64_t frac = mag % kOne;
  std::string out = neg ? "-" : "";
  out += std::to_string(whole);
  if (frac != 0) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%06llu",
                  static_cast<unsigned long long>(frac));
    std::string f(buf);
    while (!f.empty() && f.back() == '0') f.pop_back();
    out += '.';
    out += f;
  }
  return out;
}

}  // namespace pricepanel
