#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>

#include "pricepanel/calendar.hpp"
#include "pricepanel/records.hpp"

namespace pricepanel {

// Synthetic data generator with a known pass-through. The designed effect
// multiplies SUP prices by (1 + true_effect/100) in positive event bins
// (e >= 3), so the level index of treated items shifts by exactly
// true_effect points relative to the reference bin.
struct SimConfig {
  int n_products = 20;
  int n_retailers = 6;
  double sup_share = 0.5;
  YearMonth start_month{2020, 2};
  YearMonth end_month{2025, 2};
  double true_effect = 10.0;    // index points
  double noise_sd = 5.0;        // offer-level, index points
  double prod_effect_sd = 2.0;  // product-month shock, index points
  double ret_effect_sd = 2.0;   // retailer-month shock, index points
  double missing_rate = 0.1;    // per (product, retailer, month) cell
  std::uint64_t seed = 1;

  void validate() const;  // throws std::invalid_argument
};

SimConfig sim_config_from_json_text(const std::string& text);
SimConfig sim_config_from_json(const std::filesystem::path& path);
std::string sim_config_to_json(const SimConfig& cfg);

struct SimOutput {
  ProductTable products;
  OfferTable offers;
  ClickTable clicks;
  RetailerTable retailers;
  // Designed labels, keyed by prod_id; the pipeline classifier must agree.
  std::unordered_map<std::string, bool> designed_sup;
};

SimOutput generate(const SimConfig& cfg);

}  // namespace pricepanel
