#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pricepanel/decimal.hpp"

namespace pricepanel {

struct ProductRecord {
  std::string prod_id;
  std::string name;
  std::int64_t born_ts = 0;
  bool operator==(const ProductRecord&) const = default;
};

struct OfferRecord {
  std::string offer_id;
  std::string prod_id;
  std::string ret_id;
  std::int64_t ts = 0;
  Decimal price;
  bool operator==(const OfferRecord&) const = default;
};

struct ClickRecord {
  std::string prod_id;
  std::string ret_id;
  std::int64_t ts = 0;
  std::int64_t clicks = 0;
  bool operator==(const ClickRecord&) const = default;
};

struct RetailerRecord {
  std::string ret_id;
  std::string ret_name;
  std::int64_t ts = 0;
  bool operator==(const RetailerRecord&) const = default;
};

using ProductTable = std::vector<ProductRecord>;
using OfferTable = std::vector<OfferRecord>;
using ClickTable = std::vector<ClickRecord>;
using RetailerTable = std::vector<RetailerRecord>;

}  // namespace pricepanel
