#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace pricepanel {

// Exact decimal amount stored as an integer count of 1e-6 units.
// Keeps ingestion and aggregation free of binary-float rounding; values are
// converted to double only when they enter the estimator.
class Decimal {
 public:
  static constexpr int kFracDigits = 6;
  static constexpr std::int64_t kOne = 1'000'000;

  constexpr Decimal() = default;

  static constexpr Decimal from_micros(std::int64_t micros) {
    Decimal d;
    d.micros_ = micros;
    return d;
  }

  // Accepts [+-]digits[.digits] with at most six fractional digits.
  static std::optional<Decimal> parse(std::string_view s);

  // Nearest representable value, ties to even.
  static Decimal from_double(double x);

  // Arithmetic mean with round-half-even at the storage scale. The sum is
  // exact, so the result does not depend on element order.
  static Decimal mean(std::span<const Decimal> values);

  std::int64_t micros() const { return micros_; }
  double to_double() const { return static_cast<double>(micros_) / kOne; }
  bool negative() const { return micros_ < 0; }
  bool zero() const { return micros_ == 0; }

  // Canonical text form: no trailing fractional zeros ("2.5", "2", "-0.25").
  std::string str() const;

  auto operator<=>(const Decimal&) const = default;

 private:
  std::int64_t micros_ = 0;
};

}  // namespace pricepanel
