#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "pricepanel/estimator.hpp"
#include "pricepanel/ingest.hpp"
#include "pricepanel/pipeline.hpp"
#include "pricepanel/simulate.hpp"

using namespace pricepanel;

namespace {

SupPatternSet shipped_patterns() {
  return SupPatternSet::load(std::string(SOURCE_DIR) +
                             "/data/sup_patterns.csv");
}

struct PipelineFits {
  EventStudyFit treated;
  EventStudyFit control;
};

PipelineFits fit_simulated(const SimOutput& sim, const FitOptions& opts = {}) {
  const auto patterns = shipped_patterns();
  const auto cohort = filter_cohort(sim.products);
  const auto cohort_ids = id_set(cohort);
  const auto monthly = aggregate_monthly(
      apply_event_window(attach_time(sim.offers, kDefaultBaseMonth), cohort_ids,
                         {}),
      apply_event_window(attach_time(sim.clicks, kDefaultBaseMonth), cohort_ids,
                         {}));
  auto indexed = build_index(monthly.cells, kDefaultBaseMonth);
  const auto obs = assemble_obs(std::move(indexed.rows), monthly.clicks,
                                retailer_snapshot(sim.retailers));
  const auto split = split_samples(obs, cohort, patterns);
  PipelineFits fits;
  fits.treated = fit_event_study(
      RegressionSample::from_observations(split.treated, Outcome::level_index),
      opts);
  fits.control = fit_event_study(
      RegressionSample::from_observations(split.control, Outcome::level_index),
      opts);
  return fits;
}

}  // namespace

TEST_CASE("identical seeds give identical bytes, distinct seeds differ") {
  SimConfig cfg;
  cfg.n_products = 6;
  cfg.n_retailers = 3;
  cfg.end_month = {2022, 8};
  const SimOutput a = generate(cfg);
  const SimOutput b = generate(cfg);
  CHECK(products_to_csv(a.products) == products_to_csv(b.products));
  CHECK(offers_to_csv(a.offers) == offers_to_csv(b.offers));
  CHECK(clicks_to_csv(a.clicks) == clicks_to_csv(b.clicks));
  CHECK(retailers_to_csv(a.retailers) == retailers_to_csv(b.retailers));

  SimConfig other = cfg;
  other.seed = 2;
  const SimOutput c = generate(other);
  CHECK(offers_to_csv(a.offers) != offers_to_csv(c.offers));
}

TEST_CASE("designed labels equal pipeline classification for every product") {
  SimConfig cfg;
  cfg.n_products = 40;
  cfg.n_retailers = 2;
  cfg.end_month = {2020, 4};  // names are what matters here
  const SimOutput sim = generate(cfg);
  const auto patterns = shipped_patterns();
  for (const auto& p : sim.products) {
    CHECK(patterns.matches(p.name) == sim.designed_sup.at(p.prod_id));
  }
  // Both classes are represented.
  std::size_t sup = 0;
  for (const auto& [id, is_sup] : sim.designed_sup) sup += is_sup ? 1 : 0;
  CHECK(sup == 20);
}

TEST_CASE("retailers carry several rows and the snapshot picks the last") {
  SimConfig cfg;
  cfg.n_products = 2;
  cfg.n_retailers = 5;
  cfg.end_month = {2020, 3};
  const SimOutput sim = generate(cfg);
  CHECK(sim.retailers.size() > static_cast<std::size_t>(cfg.n_retailers));
  const auto snap = retailer_snapshot(sim.retailers);
  REQUIRE(snap.size() == 5);
  for (const auto& r : snap) {
    CHECK(r.ret_name.find("(alt") == std::string::npos);
  }
}

TEST_CASE("null effect without noise estimates zero everywhere") {
  SimConfig cfg;
  cfg.n_products = 6;
  cfg.n_retailers = 3;
  cfg.true_effect = 0.0;
  cfg.noise_sd = 0.0;
  cfg.prod_effect_sd = 0.0;
  cfg.ret_effect_sd = 0.0;
  cfg.missing_rate = 0.0;
  const auto fits = fit_simulated(generate(cfg));
  for (const double b : fits.treated.beta) CHECK(std::fabs(b) < 1e-8);
  for (const double b : fits.control.beta) CHECK(std::fabs(b) < 1e-8);
}

TEST_CASE("designed effect is recovered exactly without noise") {
  SimConfig cfg;
  cfg.n_products = 6;
  cfg.n_retailers = 3;
  cfg.true_effect = 10.0;
  cfg.noise_sd = 0.0;
  cfg.prod_effect_sd = 0.0;
  cfg.ret_effect_sd = 0.0;
  cfg.missing_rate = 0.0;
  const auto fits = fit_simulated(generate(cfg));
  REQUIRE(!fits.treated.bins.empty());
  for (std::size_t i = 0; i < fits.treated.bins.size(); ++i) {
    const double expected = fits.treated.bins[i] > 0 ? 10.0 : 0.0;
    CHECK(std::fabs(fits.treated.beta[i] - expected) < 1e-8);
  }
  for (const double b : fits.control.beta) CHECK(std::fabs(b) < 1e-8);
  // The full range of bins is populated with missing_rate = 0.
  CHECK(fits.treated.bins.size() == 20);  // -24..36 step 3 minus the reference
  CHECK(fits.treated.dropped_bins.empty());
}

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.n_products = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SimConfig{};
  cfg.sup_share = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SimConfig{};
  cfg.start_month = {2023, 1};
  cfg.end_month = {2022, 1};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("config json round trip") {
  SimConfig cfg;
  cfg.n_products = 11;
  cfg.true_effect = 7.5;
  cfg.seed = 99;
  const SimConfig back = sim_config_from_json_text(sim_config_to_json(cfg));
  CHECK(back.n_products == 11);
  CHECK(back.true_effect == 7.5);
  CHECK(back.seed == 99);
  CHECK(back.start_month == cfg.start_month);
}
