#include "pricepanel/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "pricepanel/csv.hpp"
#include "pricepanel/pipeline.hpp"
#include "pricepanel/rng.hpp"

namespace pricepanel {

namespace {

// Name stems for designed SUP products; each contains one Table-pattern
// keyword, with casing variation to exercise the case-insensitive matcher.
const char* kSupNames[] = {
    "Premium Einwegbecher 300ml",
    "HELIUM-LUFTBALLON Party Set",
    "To-Go Becher Bambusdesign",
    "Kunststoffbecher 0,4l gerippt",
    "GETRÄNKEBECHER Festival Edition",
    "Takeaway Box 750ml auslaufsicher",
    "Kunststoffschale rechteckig",
    "Verpackungsfolie 30cm Rolle",
    "PLASTIKFOLIE transparent 50m",
    "Plastiktüte 20er Pack",
    "Einwegtragetasche weiß",
    "Feuchttuch Spender Box",
    "Hygienetuch XXL nachfüllbar",
    "Partyballon bunt 10er",
};

// Non-SUP names; two stems carry "graphics card" for the strict control.
const char* kControlNames[] = {
    "NVIDIA RTX 4090 graphics card 24GB",
    "Edelstahl Trinkflasche 750ml",
    "Keramik Kaffeebecher Jumbo",
    "AMD Radeon graphics card 16GB",
    "USB-C Ladekabel 2m geflochten",
    "Schreibtischlampe LED dimmbar",
    "Baumwoll-Tragetasche Natur",
    "Glas Vorratsdose 1L Set",
};

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t month_start_ts(YearMonth m) {
  return days_from_civil(m.year, m.month, 1) * kSecondsPerDay;
}

std::int64_t month_length_seconds(YearMonth m) {
  YearMonth next = m;
  if (++next.month > 12) {
    next.month = 1;
    ++next.year;
  }
  return month_start_ts(next) - month_start_ts(m);
}

std::string pad_id(const char* prefix, int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, value);
  return buf;
}

}  // namespace

void SimConfig::validate() const {
  if (n_products < 2 || n_retailers < 2) {
    throw std::invalid_argument("need at least 2 products and 2 retailers");
  }
  if (sup_share < 0.0 || sup_share > 1.0) {
    throw std::invalid_argument("sup_share outside [0, 1]");
  }
  if (missing_rate < 0.0 || missing_rate > 1.0) {
    throw std::invalid_argument("missing_rate outside [0, 1]");
  }
  if (start_month > end_month) {
    throw std::invalid_argument("start_month after end_month");
  }
  if (noise_sd < 0.0 || prod_effect_sd < 0.0 || ret_effect_sd < 0.0) {
    throw std::invalid_argument("negative standard deviation");
  }
}

SimConfig sim_config_from_json_text(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  SimConfig cfg;
  cfg.n_products = j.value("n_products", cfg.n_products);
  cfg.n_retailers = j.value("n_retailers", cfg.n_retailers);
  cfg.sup_share = j.value("sup_share", cfg.sup_share);
  if (j.contains("start_month")) {
    const auto m = parse_month(j.at("start_month").get<std::string>());
    if (!m) throw std::invalid_argument("bad start_month");
    cfg.start_month = *m;
  }
  if (j.contains("end_month")) {
    const auto m = parse_month(j.at("end_month").get<std::string>());
    if (!m) throw std::invalid_argument("bad end_month");
    cfg.end_month = *m;
  }
  cfg.true_effect = j.value("true_effect", cfg.true_effect);
  cfg.noise_sd = j.value("noise_sd", cfg.noise_sd);
  cfg.prod_effect_sd = j.value("prod_effect_sd", cfg.prod_effect_sd);
  cfg.ret_effect_sd = j.value("ret_effect_sd", cfg.ret_effect_sd);
  cfg.missing_rate = j.value("missing_rate", cfg.missing_rate);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

SimConfig sim_config_from_json(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  std::string text;
  for (const auto& line : lines) text += line + "\n";
  return sim_config_from_json_text(text);
}

std::string sim_config_to_json(const SimConfig& cfg) {
  nlohmann::json j;
  j["n_products"] = cfg.n_products;
  j["n_retailers"] = cfg.n_retailers;
  j["sup_share"] = cfg.sup_share;
  j["start_month"] = format_month(cfg.start_month);
  j["end_month"] = format_month(cfg.end_month);
  j["true_effect"] = cfg.true_effect;
  j["noise_sd"] = cfg.noise_sd;
  j["prod_effect_sd"] = cfg.prod_effect_sd;
  j["ret_effect_sd"] = cfg.ret_effect_sd;
  j["missing_rate"] = cfg.missing_rate;
  j["seed"] = cfg.seed;
  return j.dump(2) + "\n";
}

SimOutput generate(const SimConfig& cfg) {
  cfg.validate();
  SimOutput out;
  const int n_sup =
      static_cast<int>(std::lround(cfg.sup_share * cfg.n_products));

  // Products. All are born inside the cohort window (first half of 2020).
  for (int i = 0; i < cfg.n_products; ++i) {
    Rng rng(mix_seed(cfg.seed, 1, i));
    const bool sup = i < n_sup;
    std::string name;
    if (sup) {
      name = std::string(kSupNames[i % std::size(kSupNames)]);
    } else {
      name = std::string(kControlNames[i % std::size(kControlNames)]);
    }
    name += " Nr. " + std::to_string(i + 1);
    const std::int64_t born =
        kCohortBirthCutoff + 1 +
        static_cast<std::int64_t>(rng.uniform() * 180.0 * kSecondsPerDay);
    const std::string prod_id = pad_id("P", i + 1, 4);
    out.products.push_back(ProductRecord{prod_id, name, born});
    out.designed_sup.emplace(prod_id, sup);
  }

  // Retailers: several timestamped attribute rows; the snapshot should pick
  // the last one.
  for (int j = 0; j < cfg.n_retailers; ++j) {
    Rng rng(mix_seed(cfg.seed, 2, j));
    const std::string ret_id = pad_id("R", j + 1, 2);
    const std::string final_name =
        "Shop " + std::to_string(j + 1) + " Handels GmbH";
    const int extra_rows = 1 + static_cast<int>(rng.uniform_below(2));
    std::int64_t ts = month_start_ts({2019, 3}) +
                      static_cast<std::int64_t>(rng.uniform() * 30.0 *
                                                kSecondsPerDay);
    for (int k = 0; k < extra_rows; ++k) {
      out.retailers.push_back(
          RetailerRecord{ret_id, final_name + " (alt " + std::to_string(k + 1) + ")", ts});
      ts += 200 * kSecondsPerDay +
            static_cast<std::int64_t>(rng.uniform() * 100.0 * kSecondsPerDay);
    }
    out.retailers.push_back(RetailerRecord{ret_id, final_name, ts});
  }

  // Offers and clicks, month by month. All stochastic inputs come from
  // counter-based substreams so the output is reproducible cell by cell.
  const double log_effect = std::log1p(cfg.true_effect / 100.0);
  std::int64_t offer_seq = 0;
  for (int i = 0; i < cfg.n_products; ++i) {
    const std::string prod_id = out.products[i].prod_id;
    const bool sup = i < n_sup;
    for (int j = 0; j < cfg.n_retailers; ++j) {
      const std::string ret_id = pad_id("R", j + 1, 2);
      // Base price per pair, quantized to whole cents.
      Rng base_rng(mix_seed(cfg.seed, 3, i, j));
      const double base_raw =
          std::exp(std::log(2.0) +
                   base_rng.uniform() * (std::log(40.0) - std::log(2.0)));
      const std::int64_t base_cents =
          std::max<std::int64_t>(1, std::llround(base_raw * 100.0));
      const double base = static_cast<double>(base_cents) / 100.0;

      int t_index = 0;
      for (YearMonth m = cfg.start_month; m <= cfg.end_month; ++t_index) {
        const int e = months_between(m, kDefaultBaseMonth);
        Rng cell_rng(mix_seed(cfg.seed, 4, (static_cast<std::uint64_t>(i) << 20) | j, t_index));
        const bool missing = cell_rng.uniform() < cfg.missing_rate;
        if (!missing) {
          const double u_it =
              Rng(mix_seed(cfg.seed, 5, i, t_index)).normal() *
              (cfg.prod_effect_sd / 100.0);
          const double v_jt =
              Rng(mix_seed(cfg.seed, 6, j, t_index)).normal() *
              (cfg.ret_effect_sd / 100.0);
          const bool effect_on = sup && e >= 3;
          const int n_offers = 1 + static_cast<int>(cell_rng.uniform_below(3));
          for (int o = 0; o < n_offers; ++o) {
            const double w = cell_rng.normal() * (cfg.noise_sd / 100.0);
            const double price =
                base * (effect_on ? std::exp(log_effect) : 1.0) *
                std::exp(u_it + v_jt + w);
            const std::int64_t ts =
                month_start_ts(m) +
                static_cast<std::int64_t>(cell_rng.uniform() *
                                          static_cast<double>(
                                              month_length_seconds(m) - 1));
            out.offers.push_back(OfferRecord{
                pad_id("O", static_cast<int>(++offer_seq), 8), prod_id, ret_id,
                ts, Decimal::from_double(price)});
          }
          if (cell_rng.uniform() < 0.8) {
            const std::int64_t ts =
                month_start_ts(m) +
                static_cast<std::int64_t>(cell_rng.uniform() *
                                          static_cast<double>(
                                              month_length_seconds(m) - 1));
            out.clicks.push_back(ClickRecord{
                prod_id, ret_id, ts,
                static_cast<std::int64_t>(cell_rng.uniform_below(41))});
          }
        }
        if (++m.month > 12) {
          m.month = 1;
          ++m.year;
        }
      }
    }
  }
  return out;
}

}  // namespace pricepanel
