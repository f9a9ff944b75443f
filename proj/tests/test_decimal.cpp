#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <vector>

#include "pricepanel/csv.hpp"
#include "pricepanel/decimal.hpp"
#include "pricepanel/format.hpp"
#include "pricepanel/rng.hpp"

using namespace pricepanel;

TEST_CASE("decimal parsing") {
  CHECK(Decimal::parse("2.00")->micros() == 2'000'000);
  CHECK(Decimal::parse("0.000001")->micros() == 1);
  CHECK(Decimal::parse("-1.5")->micros() == -1'500'000);
  CHECK(Decimal::parse("19.99")->micros() == 19'990'000);
  CHECK(Decimal::parse("7")->micros() == 7'000'000);
  CHECK(Decimal::parse("1.")->micros() == 1'000'000);
  CHECK(!Decimal::parse("").has_value());
  CHECK(!Decimal::parse("1.2345678").has_value());  // too many digits
  CHECK(!Decimal::parse("abc").has_value());
  CHECK(!Decimal::parse("1e3").has_value());
  CHECK(!Decimal::parse("12 ").has_value());
}

TEST_CASE("decimal canonical text") {
  CHECK(Decimal::parse("2.00")->str() == "2");
  CHECK(Decimal::parse("2.50")->str() == "2.5");
  CHECK(Decimal::parse("-0.25")->str() == "-0.25");
  CHECK(Decimal::parse("0.000001")->str() == "0.000001");
  // Round trip through the canonical form.
  CHECK(Decimal::parse(Decimal::parse("3.140000")->str())->micros() ==
        3'140'000);
}

TEST_CASE("decimal mean") {
  const std::vector<Decimal> two = {*Decimal::parse("2.00"),
                                    *Decimal::parse("3.00")};
  CHECK(Decimal::mean(two).str() == "2.5");

  // Round-half-even at the micro scale: 0.0000005 rounds to even 0.
  const std::vector<Decimal> tie = {Decimal::from_micros(0),
                                    Decimal::from_micros(1)};
  CHECK(Decimal::mean(tie).micros() == 0);
  const std::vector<Decimal> tie_up = {Decimal::from_micros(1),
                                       Decimal::from_micros(2)};
  CHECK(Decimal::mean(tie_up).micros() == 2);
}

TEST_CASE("decimal mean is order independent") {
  Rng rng(3);
  std::vector<Decimal> values;
  for (int i = 0; i < 200; ++i) {
    values.push_back(Decimal::from_micros(
        static_cast<std::int64_t>(rng.uniform() * 1e9)));
  }
  const Decimal forward = Decimal::mean(values);
  std::reverse(values.begin(), values.end());
  CHECK(Decimal::mean(values) == forward);
}

TEST_CASE("csv quoting round trip") {
  const std::vector<std::string> fields = {"plain", "with,comma",
                                           "with \"quote\"", ""};
  const std::string row = csv::make_row(fields);
  const auto parsed = csv::parse_row(row);
  REQUIRE(parsed.has_value());
  CHECK(*parsed == fields);
  CHECK(!csv::parse_row("\"unterminated").has_value());
  CHECK(!csv::parse_row("a\"b").has_value());
}

TEST_CASE("fixed formatting rounds half to even") {
  CHECK(format_fixed(0.125, 2) == "0.12");
  CHECK(format_fixed(0.375, 2) == "0.38");
  CHECK(format_fixed(-33.482, 2) == "-33.48");
  CHECK(format_fixed(-0.0001, 2) == "0.00");
  CHECK(format_fixed(19.995, 2) == "20.00");  // binary 19.995 sits above the tie
}

TEST_CASE("shortest double formatting round trips") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const double x = (rng.uniform() - 0.5) * 1e6;
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(125.0) == "125");
}
