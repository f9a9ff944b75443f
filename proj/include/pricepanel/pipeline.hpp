#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "pricepanel/calendar.hpp"
#include "pricepanel/decimal.hpp"
#include "pricepanel/ilike.hpp"
#include "pricepanel/records.hpp"

namespace pricepanel {

// Products enter the cohort when born strictly after this instant
// (2020-01-01 00:00:00 UTC).
inline constexpr std::int64_t kCohortBirthCutoff = 1'577'836'800;

inline constexpr YearMonth kDefaultBaseMonth{2022, 2};

struct PanelOptions {
  YearMonth base_month = kDefaultBaseMonth;
  EventWindow window{};
};

// Offer/click row with attached time variables. The week is metadata only;
// nothing downstream consumes it.
struct TimedOffer {
  std::string prod_id;
  std::string ret_id;
  std::int64_t ts = 0;
  Decimal price;
  IsoWeek week;
  YearMonth month;
  int e = 0;
};

struct TimedClick {
  std::string prod_id;
  std::string ret_id;
  std::int64_t ts = 0;
  std::int64_t clicks = 0;
  IsoWeek week;
  YearMonth month;
  int e = 0;
};

// One (product, retailer, month) cell.
struct PanelCell {
  std::string prod_id;
  std::string ret_id;
  YearMonth month;
  Decimal mean_price;
  std::optional<std::int64_t> clicks;
  int e = 0;
  int bin = 0;
};

struct MonthlyClicks {
  std::string prod_id;
  std::string ret_id;
  YearMonth month;
  std::int64_t clicks = 0;
};

// PanelCell extended with the base-month price and index; the analysis row.
struct IndexedObservation {
  std::string prod_id;
  std::string ret_id;
  std::optional<std::string> ret_name;
  YearMonth month;
  int e = 0;
  int bin = 0;
  Decimal mean_price;
  std::optional<Decimal> base_price;
  std::optional<double> level_index;  // P = 100 * mean/base
  std::optional<double> log_index;    // ln(P)
  std::optional<std::int64_t> clicks;
};

using ObsTable = std::vector<IndexedObservation>;

std::vector<TimedOffer> attach_time(const OfferTable& offers,
                                    YearMonth base_month);
std::vector<TimedClick> attach_time(const ClickTable& clicks,
                                    YearMonth base_month);

// Products born strictly after the cutoff.
ProductTable filter_cohort(const ProductTable& products);

std::unordered_set<std::string> id_set(const ProductTable& products);

// Rows inside the event window whose product is in the cohort.
std::vector<TimedOffer> apply_event_window(
    const std::vector<TimedOffer>& rows,
    const std::unordered_set<std::string>& cohort_ids, EventWindow window);
std::vector<TimedClick> apply_event_window(
    const std::vector<TimedClick>& rows,
    const std::unordered_set<std::string>& cohort_ids, EventWindow window);

struct MonthlyPanel {
  std::vector<PanelCell> cells;         // one per (prod, ret, month) with offers
  std::vector<MonthlyClicks> clicks;    // click sums, independent of offers
};

// Group offers to mean price and clicks to monthly sums per cell. Cells come
// from offers; click sums join in left-outer (absent when no click rows).
// Output sorted by (prod_id, ret_id, month).
MonthlyPanel aggregate_monthly(const std::vector<TimedOffer>& offers,
                               const std::vector<TimedClick>& clicks,
                               const PanelOptions& opts = {});

struct IndexDiagnostics {
  std::size_t pairs_without_base = 0;
  std::size_t zero_base_pairs = 0;
};

struct IndexedPanel {
  ObsTable rows;
  IndexDiagnostics diagnostics;
};

// Attach the base-month price per (prod, ret) and compute P = 100*mean/base
// and ln(P). Pairs without a base month (or zero base) keep their rows with
// the index absent.
IndexedPanel build_index(const std::vector<PanelCell>& cells,
                         YearMonth base_month);

// Analysis table: left-outer join of monthly clicks by (prod, ret, month)
// and the retailer snapshot by ret_id.
ObsTable assemble_obs(ObsTable indexed, const std::vector<MonthlyClicks>& clicks,
                      const RetailerTable& snapshot);

struct SampleSplit {
  ObsTable treated;
  ObsTable control;
  ObsTable strict;
  std::size_t sup_products = 0;
  std::size_t control_products = 0;
  std::size_t strict_products = 0;
};

// treated = obs of SUP products, control = cohort minus SUP, strict =
// control restricted to names matching %graphics card%.
SampleSplit split_samples(const ObsTable& obs, const ProductTable& cohort,
                          const SupPatternSet& patterns);

// Analysis-table export, columns exactly:
// prod_id,ret_id,ret_name,month,e,b,P,logP,clk
std::string obs_to_csv(const ObsTable& rows);
ObsTable obs_from_csv(const std::filesystem::path& path);

}  // namespace pricepanel
