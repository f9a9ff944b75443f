#pragma once

namespace pricepanel {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pricepanel
