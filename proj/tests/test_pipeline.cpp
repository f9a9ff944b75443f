#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <tuple>

#include "pricepanel/csv.hpp"
#include "pricepanel/ingest.hpp"
#include "pricepanel/pipeline.hpp"
#include "pricepanel/rng.hpp"

using namespace pricepanel;

namespace {

std::int64_t ts_of(int y, int m, int d, int hour = 12) {
  return days_from_civil(y, m, d) * 86400 + hour * 3600;
}

OfferRecord offer(const std::string& prod, const std::string& ret,
                  std::int64_t ts, const char* price) {
  static int seq = 0;
  return OfferRecord{"O" + std::to_string(++seq), prod, ret, ts,
                     *Decimal::parse(price)};
}

SupPatternSet toy_patterns() {
  return SupPatternSet::from_rows({{"Balloons", "%luftballon%"},
                                   {"Beverage cups", "%einwegbecher%"}});
}

}  // namespace

TEST_CASE("filter_cohort uses a strict birth cutoff") {
  const ProductTable products = {{"P1", "a", kCohortBirthCutoff},
                                 {"P2", "b", kCohortBirthCutoff + 1},
                                 {"P3", "c", 0}};
  const auto cohort = filter_cohort(products);
  REQUIRE(cohort.size() == 1);
  CHECK(cohort[0].prod_id == "P2");
  CHECK(filter_cohort({}).empty());
}

TEST_CASE("attach_time fills month, week and event time") {
  const OfferTable offers = {offer("P1", "R1", ts_of(2022, 5, 10), "2.00")};
  const auto timed = attach_time(offers, kDefaultBaseMonth);
  REQUIRE(timed.size() == 1);
  CHECK(timed[0].month == YearMonth{2022, 5});
  CHECK(timed[0].e == 3);
  CHECK(timed[0].week.year == 2022);
}

TEST_CASE("apply_event_window keeps the closed interval and the cohort") {
  const std::unordered_set<std::string> cohort = {"P1"};
  OfferTable offers = {
      offer("P1", "R1", ts_of(2025, 5, 2), "1.00"),   // e = 39, out
      offer("P1", "R1", ts_of(2020, 2, 15), "1.00"),  // e = -24, in
      offer("P1", "R1", ts_of(2025, 2, 10), "1.00"),  // e = 36, in
      offer("P9", "R1", ts_of(2022, 3, 1), "1.00"),   // not in cohort
  };
  const auto timed = attach_time(offers, kDefaultBaseMonth);
  CHECK(timed[0].e == 39);
  const auto windowed = apply_event_window(timed, cohort, EventWindow{});
  REQUIRE(windowed.size() == 2);
  CHECK(windowed[0].e == -24);
  CHECK(windowed[1].e == 36);
}

TEST_CASE("aggregate_monthly means prices and sums clicks") {
  const std::unordered_set<std::string> cohort = {"P1"};
  OfferTable offers = {offer("P1", "R1", ts_of(2022, 2, 3), "2.00"),
                       offer("P1", "R1", ts_of(2022, 2, 20), "3.00")};
  ClickTable clicks = {{"P1", "R1", ts_of(2022, 2, 4), 5},
                       {"P1", "R1", ts_of(2022, 2, 5), 7},
                       {"P1", "R2", ts_of(2022, 2, 5), 9}};
  const auto monthly = aggregate_monthly(
      apply_event_window(attach_time(offers, kDefaultBaseMonth), cohort, {}),
      apply_event_window(attach_time(clicks, kDefaultBaseMonth), cohort, {}));
  REQUIRE(monthly.cells.size() == 1);
  CHECK(monthly.cells[0].mean_price.str() == "2.5");
  CHECK(monthly.cells[0].clicks == 12);
  CHECK(monthly.cells[0].e == 0);
  CHECK(monthly.cells[0].bin == 0);
  // The click table still carries the cell that has no offers.
  CHECK(monthly.clicks.size() == 2);

  OfferTable no_click_offers = {offer("P1", "R1", ts_of(2022, 3, 3), "4.00")};
  const auto monthly2 = aggregate_monthly(
      apply_event_window(attach_time(no_click_offers, kDefaultBaseMonth),
                         cohort, {}),
      {});
  REQUIRE(monthly2.cells.size() == 1);
  CHECK(!monthly2.cells[0].clicks.has_value());
}

TEST_CASE("aggregate_monthly equals a nested-loop group-by oracle") {
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<TimedOffer> offers;
    std::vector<TimedClick> clicks;
    const int n = 1 + static_cast<int>(rng.uniform_below(1000));
    for (int i = 0; i < n; ++i) {
      TimedOffer o;
      o.prod_id = "P" + std::to_string(rng.uniform_below(5));
      o.ret_id = "R" + std::to_string(rng.uniform_below(3));
      o.month = YearMonth{2022, 1 + static_cast<int>(rng.uniform_below(12))};
      o.e = months_between(o.month, kDefaultBaseMonth);
      o.price = Decimal::from_micros(
          static_cast<std::int64_t>(rng.uniform_below(100000000)));
      offers.push_back(o);
      if (rng.uniform() < 0.5) {
        TimedClick c;
        c.prod_id = o.prod_id;
        c.ret_id = o.ret_id;
        c.month = o.month;
        c.e = o.e;
        c.clicks = static_cast<std::int64_t>(rng.uniform_below(50));
        clicks.push_back(c);
      }
    }
    const auto monthly = aggregate_monthly(offers, clicks);

    // Oracle: nested loops, no maps.
    using Key = std::tuple<std::string, std::string, YearMonth>;
    std::vector<Key> keys;
    for (const auto& o : offers) {
      const Key k{o.prod_id, o.ret_id, o.month};
      bool seen = false;
      for (const auto& existing : keys) seen = seen || existing == k;
      if (!seen) keys.push_back(k);
    }
    CHECK(monthly.cells.size() == keys.size());
    for (const auto& cell : monthly.cells) {
      std::vector<Decimal> prices;
      for (const auto& o : offers) {
        if (o.prod_id == cell.prod_id && o.ret_id == cell.ret_id &&
            o.month == cell.month) {
          prices.push_back(o.price);
        }
      }
      REQUIRE(!prices.empty());
      CHECK(Decimal::mean(prices) == cell.mean_price);
      std::int64_t click_sum = 0;
      bool any_click = false;
      for (const auto& c : clicks) {
        if (c.prod_id == cell.prod_id && c.ret_id == cell.ret_id &&
            c.month == cell.month) {
          click_sum += c.clicks;
          any_click = true;
        }
      }
      CHECK(cell.clicks.has_value() == any_click);
      if (any_click) CHECK(*cell.clicks == click_sum);
    }
  }
}

TEST_CASE("build_index computes P against the base month") {
  std::vector<PanelCell> cells;
  auto cell = [](const char* prod, const char* ret, YearMonth m,
                 const char* price) {
    PanelCell c;
    c.prod_id = prod;
    c.ret_id = ret;
    c.month = m;
    c.mean_price = *Decimal::parse(price);
    c.e = months_between(m, kDefaultBaseMonth);
    c.bin = assign_bin(c.e);
    return c;
  };
  cells.push_back(cell("P1", "R1", {2022, 2}, "2.00"));
  cells.push_back(cell("P1", "R1", {2022, 5}, "2.50"));
  cells.push_back(cell("P2", "R1", {2022, 5}, "4.00"));  // no base month
  cells.push_back(cell("P3", "R1", {2022, 2}, "0.00"));  // zero base
  cells.push_back(cell("P3", "R1", {2022, 3}, "1.00"));

  const auto indexed = build_index(cells, kDefaultBaseMonth);
  REQUIRE(indexed.rows.size() == 5);
  CHECK(indexed.rows[0].level_index == 100.0);  // exactly
  CHECK(indexed.rows[1].level_index == 125.0);
  CHECK(!indexed.rows[2].level_index.has_value());
  CHECK(!indexed.rows[3].level_index.has_value());
  CHECK(!indexed.rows[4].level_index.has_value());
  CHECK(indexed.rows[2].base_price.has_value() == false);
  CHECK(indexed.diagnostics.pairs_without_base == 2);
  CHECK(indexed.diagnostics.zero_base_pairs == 1);
  CHECK(indexed.rows[0].log_index == std::log(100.0));
}

TEST_CASE("assemble_obs joins clicks and the snapshot left-outer") {
  std::vector<PanelCell> cells;
  PanelCell c;
  c.prod_id = "P1";
  c.ret_id = "R1";
  c.month = {2022, 2};
  c.mean_price = *Decimal::parse("2.00");
  c.e = 0;
  c.bin = 0;
  cells.push_back(c);
  c.ret_id = "R2";
  cells.push_back(c);
  auto indexed = build_index(cells, kDefaultBaseMonth);
  const std::vector<MonthlyClicks> clicks = {{"P1", "R1", {2022, 2}, 11}};
  const RetailerTable snapshot = {{"R1", "Shop Eins", 99}};
  const auto obs = assemble_obs(std::move(indexed.rows), clicks, snapshot);
  REQUIRE(obs.size() == 2);
  CHECK(obs[0].clicks == 11);
  CHECK(obs[0].ret_name == "Shop Eins");
  CHECK(!obs[1].clicks.has_value());
  CHECK(!obs[1].ret_name.has_value());  // no snapshot match, row kept
}

// Two products x two retailers x four months, traced by hand.
TEST_CASE("toy pipeline matches the hand-traced table") {
  const ProductTable products = {
      {"P1", "Luftballon Party", kCohortBirthCutoff + 5},
      {"P2", "Graphics card xtreme", kCohortBirthCutoff + 6}};
  const RetailerTable retailers = {
      {"R1", "Shop A", 50}, {"R1", "Shop A neu", 80}, {"R2", "Shop B", 10}};
  OfferTable offers;
  // P1/R1: base 2.00, then 3.00 in 2022-04 (e=2), 2.50 in 2022-05 (e=3)
  offers.push_back(offer("P1", "R1", ts_of(2022, 2, 1), "2.00"));
  offers.push_back(offer("P1", "R1", ts_of(2022, 2, 28), "2.00"));
  offers.push_back(offer("P1", "R1", ts_of(2022, 4, 10), "3.00"));
  offers.push_back(offer("P1", "R1", ts_of(2022, 5, 10), "2.50"));
  // P1/R2: no base month, one later cell
  offers.push_back(offer("P1", "R2", ts_of(2022, 5, 3), "9.00"));
  // P2/R1: base 4.00, drop to 3.00 at e=-1 (2022-01)
  offers.push_back(offer("P2", "R1", ts_of(2022, 1, 20), "3.00"));
  offers.push_back(offer("P2", "R1", ts_of(2022, 2, 14), "4.00"));
  const ClickTable clicks = {{"P1", "R1", ts_of(2022, 4, 2), 3},
                             {"P1", "R1", ts_of(2022, 4, 22), 4}};

  const auto cohort = filter_cohort(products);
  const auto cohort_ids = id_set(cohort);
  const auto monthly = aggregate_monthly(
      apply_event_window(attach_time(offers, kDefaultBaseMonth), cohort_ids, {}),
      apply_event_window(attach_time(clicks, kDefaultBaseMonth), cohort_ids, {}));
  auto indexed = build_index(monthly.cells, kDefaultBaseMonth);
  const auto obs = assemble_obs(std::move(indexed.rows), monthly.clicks,
                                retailer_snapshot(retailers));

  REQUIRE(obs.size() == 6);
  // Sorted by (prod, ret, month): P1R1 Feb/Apr/May, P1R2 May, P2R1 Jan/Feb.
  CHECK(obs[0].month == YearMonth{2022, 2});
  CHECK(obs[0].e == 0);
  CHECK(obs[0].bin == 0);
  CHECK(obs[0].level_index == 100.0);
  CHECK(obs[0].ret_name == "Shop A neu");

  CHECK(obs[1].month == YearMonth{2022, 4});
  CHECK(obs[1].e == 2);
  CHECK(obs[1].bin == 0);
  CHECK(obs[1].level_index == 150.0);
  CHECK(obs[1].clicks == 7);

  CHECK(obs[2].month == YearMonth{2022, 5});
  CHECK(obs[2].e == 3);
  CHECK(obs[2].bin == 3);
  CHECK(obs[2].level_index == 125.0);
  CHECK(!obs[2].clicks.has_value());

  CHECK(obs[3].ret_id == "R2");
  CHECK(!obs[3].level_index.has_value());  // LOJ: no base for the pair
  CHECK(obs[3].ret_name == "Shop B");

  CHECK(obs[4].prod_id == "P2");
  CHECK(obs[4].e == -1);
  CHECK(obs[4].bin == -3);
  CHECK(obs[4].level_index == 75.0);

  CHECK(obs[5].e == 0);
  CHECK(obs[5].level_index == 100.0);

  const SupPatternSet patterns = toy_patterns();
  const auto split = split_samples(obs, cohort, patterns);
  CHECK(split.sup_products == 1);
  CHECK(split.control_products == 1);
  CHECK(split.strict_products == 1);
  CHECK(split.treated.size() == 4);
  CHECK(split.control.size() == 2);
  CHECK(split.strict.size() == 2);
}

TEST_CASE("split samples partition the cohort") {
  Rng rng(77);
  ProductTable products;
  ObsTable obs;
  for (int i = 0; i < 40; ++i) {
    ProductRecord p;
    p.prod_id = "P" + std::to_string(i);
    const int flavor = static_cast<int>(rng.uniform_below(3));
    p.name = flavor == 0   ? "Einwegbecher Nr. " + std::to_string(i)
             : flavor == 1 ? "RTX graphics card Nr. " + std::to_string(i)
                           : "Trinkflasche Nr. " + std::to_string(i);
    p.born_ts = kCohortBirthCutoff + 1 + i;
    products.push_back(p);
    IndexedObservation row;
    row.prod_id = p.prod_id;
    row.ret_id = "R1";
    row.month = {2022, 2};
    row.level_index = 100.0;
    obs.push_back(row);
  }
  const auto split = split_samples(obs, filter_cohort(products), toy_patterns());
  CHECK(split.treated.size() + split.control.size() == obs.size());
  CHECK(split.sup_products + split.control_products == products.size());
  CHECK(split.strict.size() <= split.control.size());
  // Disjointness by product id.
  std::unordered_set<std::string> treated_ids;
  for (const auto& r : split.treated) treated_ids.insert(r.prod_id);
  for (const auto& r : split.control) CHECK(!treated_ids.contains(r.prod_id));
}

TEST_CASE("obs csv round trips and is byte deterministic") {
  std::vector<PanelCell> cells;
  PanelCell c;
  c.prod_id = "P1";
  c.ret_id = "R,1";  // forces quoting
  c.month = {2022, 2};
  c.mean_price = *Decimal::parse("3.00");
  c.e = 0;
  c.bin = 0;
  cells.push_back(c);
  c.month = {2022, 7};
  c.e = 5;
  c.bin = 3;
  cells.push_back(c);
  auto indexed = build_index(cells, kDefaultBaseMonth);
  const auto obs = assemble_obs(std::move(indexed.rows), {},
                                {{"R,1", "Komma, Shop", 1}});
  const std::string csv_a = obs_to_csv(obs);
  const std::string csv_b = obs_to_csv(obs);
  CHECK(csv_a == csv_b);
  CHECK(csv_a.substr(0, csv_a.find('\n')) ==
        "prod_id,ret_id,ret_name,month,e,b,P,logP,clk");

  const auto dir = std::filesystem::temp_directory_path() / "pp_obs_csv";
  std::filesystem::create_directories(dir);
  csv::write_file(dir / "obs.csv", csv_a);
  const auto back = obs_from_csv(dir / "obs.csv");
  REQUIRE(back.size() == obs.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].prod_id == obs[i].prod_id);
    CHECK(back[i].ret_id == obs[i].ret_id);
    CHECK(back[i].ret_name == obs[i].ret_name);
    CHECK(back[i].month == obs[i].month);
    CHECK(back[i].e == obs[i].e);
    CHECK(back[i].bin == obs[i].bin);
    CHECK(back[i].level_index == obs[i].level_index);
    CHECK(back[i].log_index == obs[i].log_index);
    CHECK(back[i].clicks == obs[i].clicks);
  }
}

TEST_CASE("P is exactly 100 at the base month for every based pair") {
  Rng rng(55);
  std::vector<PanelCell> cells;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int m = 0; m < 6; ++m) {
        if (rng.uniform() < 0.2) continue;
        PanelCell c;
        c.prod_id = "P" + std::to_string(i);
        c.ret_id = "R" + std::to_string(j);
        c.month = YearMonth{2022, 1 + m};
        c.e = months_between(c.month, kDefaultBaseMonth);
        c.bin = assign_bin(c.e);
        c.mean_price = Decimal::from_micros(
            1 + static_cast<std::int64_t>(rng.uniform_below(10000000)));
        cells.push_back(c);
      }
    }
  }
  const auto indexed = build_index(cells, kDefaultBaseMonth);
  for (const auto& row : indexed.rows) {
    if (row.month == kDefaultBaseMonth && row.base_price.has_value() &&
        !row.base_price->zero()) {
      CHECK(*row.level_index == 100.0);  // exact
    }
  }
}
