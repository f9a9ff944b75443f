#pragma once

#include <string>

namespace pricepanel {

// Shortest round-trip representation (std::to_chars). Used for CSV/JSON
// exports so identical doubles always serialize to identical bytes.
std::string format_double(double x);

// Fixed-point with the given number of decimals, round-half-even on the
// exact binary value. Negative zero is normalized to positive.
std::string format_fixed(double x, int decimals);

}  // namespace pricepanel
