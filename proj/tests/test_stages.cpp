#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "pricepanel/csv.hpp"
#include "pricepanel/digest.hpp"
#include "pricepanel/simulate.hpp"
#include "pricepanel/stages.hpp"

using namespace pricepanel;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pp_stages_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string patterns_path() {
  return std::string(SOURCE_DIR) + "/data/sup_patterns.csv";
}

// Small end-to-end config on simulated data.
nlohmann::json runall_config(const fs::path& out_dir, std::uint64_t seed) {
  nlohmann::json cfg;
  cfg["out_dir"] = out_dir.string();
  cfg["simulate"] = {{"enabled", true},      {"n_products", 12},
                     {"n_retailers", 4},     {"sup_share", 0.5},
                     {"true_effect", 10.0},  {"noise_sd", 2.0},
                     {"prod_effect_sd", 1.0}, {"ret_effect_sd", 1.0},
                     {"missing_rate", 0.05}, {"seed", seed}};
  cfg["build_panel"] = {{"patterns", patterns_path()},
                        {"base_month", "2022-02"},
                        {"window", "-24:36"}};
  cfg["fit"] = {{"outcome", "P"}, {"ref_bin", 0}, {"ssc", "standard"}};
  cfg["did"] = {{"windows", {"6", "12", "full"}}};
  cfg["report"] = {{"format", "csv"}};
  cfg["plot_data"] = {{"level", 0.90}};
  return cfg;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  return j;
}

}  // namespace

TEST_CASE("ingest stage writes the normalized tables and rejects") {
  const auto dir = temp_dir("ingest");
  csv::write_file(dir / "products.csv",
                  "prod_id,name,born_ts\nP1,Einwegbecher,1600000000\n");
  csv::write_file(dir / "offers.csv",
                  "offer_id,prod_id,ret_id,ts,price\n"
                  "O1,P1,R1,1600000000,2.00\n"
                  "O2,P1,R1,1600000000,-3.00\n"
                  "O3,P9,R1,1600000000,1.00\n");
  csv::write_file(dir / "clicks.csv", "prod_id,ret_id,ts,clicks\n");
  csv::write_file(dir / "retailers.csv",
                  "ret_id,ret_name,ts\nR1,Shop,5\nR1,Shop neu,9\n");

  IngestArgs args{dir / "products.csv", dir / "offers.csv", dir / "clicks.csv",
                  dir / "retailers.csv", dir / "out", false};
  const auto summary = run_ingest(args);
  CHECK(summary.offers_rows == 2);  // lenient keeps the unknown-product row
  CHECK(summary.rejects == 1);
  CHECK(summary.ref_warnings == 1);
  CHECK(fs::exists(dir / "out" / "rejects.csv"));
  CHECK(fs::exists(dir / "out" / "retailer_snapshot.csv"));
  const auto rejects = csv::read_lines(dir / "out" / "rejects.csv");
  REQUIRE(rejects.size() >= 2);
  CHECK(rejects[0] == "table,line,reason,raw");
  CHECK(rejects[1].find("negative price") != std::string::npos);
  const auto snapshot = csv::read_lines(dir / "out" / "retailer_snapshot.csv");
  CHECK(snapshot[1] == "R1,Shop neu,9");

  IngestArgs strict = args;
  strict.strict_refs = true;
  strict.out_dir = dir / "out_strict";
  const auto strict_summary = run_ingest(strict);
  CHECK(strict_summary.offers_rows == 1);
  CHECK(strict_summary.rejects == 2);
}

TEST_CASE("build-panel reports a missing patterns file") {
  const auto dir = temp_dir("patterns");
  BuildPanelArgs args;
  args.in_dir = dir;
  args.patterns = dir / "nope.csv";
  args.out_dir = dir / "out";
  CHECK_THROWS_WITH_AS(run_build_panel(args), "patterns file not found",
                       std::runtime_error);
}

TEST_CASE("run_all produces the full artifact tree and recovers the effect") {
  const auto dir = temp_dir("runall");
  const auto cfg = runall_config(dir / "out", 7);
  const fs::path cfg_path = dir / "config.json";
  csv::write_file(cfg_path, cfg.dump(2) + "\n");

  const auto result = run_all(cfg_path, "test run");
  CHECK(fs::exists(result.manifest_path));
  for (const char* rel :
       {"panel/obs.csv", "panel/obs_treated.csv", "panel/obs_control.csv",
        "panel/obs_strict.csv", "panel/diagnostics.json",
        "fit/fit_treated.json", "fit/fit_control.json", "did/did.json",
        "report/event_study.csv", "plot/series.csv"}) {
    CHECK(fs::exists(dir / "out" / rel));
  }

  const auto did = read_json(dir / "out" / "did" / "did.json");
  REQUIRE(did.at("windows").size() == 3);
  double full_tmc = 0.0;
  for (const auto& w : did.at("windows")) {
    if (w.at("window") == "full") {
      full_tmc = w.at("treated_minus_control").at("estimate").get<double>();
      CHECK(w.at("treated").at("estimate").get<double>() ==
            doctest::Approx(10.0).epsilon(0.15));
      CHECK(std::fabs(w.at("control").at("estimate").get<double>()) < 1.5);
    }
  }
  CHECK(full_tmc == doctest::Approx(10.0).epsilon(0.15));

  const auto diagnostics = read_json(dir / "out" / "panel" / "diagnostics.json");
  CHECK(diagnostics.at("cohort_products").get<int>() == 12);
  CHECK(diagnostics.at("sup_products").get<int>() == 6);

  // The plot export carries both groups.
  const auto series = csv::read_lines(dir / "out" / "plot" / "series.csv");
  CHECK(series[0] == "bin,group,estimate,lo90,hi90");
  bool has_treated = false, has_control = false;
  for (const auto& line : series) {
    has_treated = has_treated || line.find(",treated,") != std::string::npos;
    has_control = has_control || line.find(",control,") != std::string::npos;
  }
  CHECK(has_treated);
  CHECK(has_control);
}

TEST_CASE("run_all is deterministic across reruns and thread caps") {
  const auto dir = temp_dir("determinism");

  auto digests_for = [&](const std::string& tag, const char* threads) {
    const fs::path out = dir / tag;
    const auto cfg = runall_config(out, 11);
    const fs::path cfg_path = dir / (tag + ".json");
    csv::write_file(cfg_path, cfg.dump(2) + "\n");
    setenv("PANEL_THREADS", threads, 1);
    run_all(cfg_path, "determinism check");
    unsetenv("PANEL_THREADS");
    std::map<std::string, std::string> digests;
    for (const char* rel :
         {"panel/obs.csv", "fit/fit_treated.json", "fit/fit_control.json",
          "did/did.json"}) {
      digests[rel] = sha256_file_hex(out / rel);
    }
    return digests;
  };

  const auto a = digests_for("a", "1");
  const auto b = digests_for("b", "4");
  const auto c = digests_for("c", "2");
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("stage failures carry the stage tag") {
  const auto dir = temp_dir("failure");
  auto cfg = runall_config(dir / "out", 3);
  cfg["build_panel"]["patterns"] = (dir / "missing_patterns.csv").string();
  const fs::path cfg_path = dir / "config.json";
  csv::write_file(cfg_path, cfg.dump(2) + "\n");
  CHECK_THROWS_WITH_AS(run_all(cfg_path, "x"),
                       "build-panel: patterns file not found",
                       std::runtime_error);
}

TEST_CASE("fit stage rejects unknown cluster specs") {
  FitArgs args;
  args.cluster = "prod";
  CHECK_THROWS_WITH_AS(run_fit(args), doctest::Contains("cluster"),
                       std::runtime_error);
}

TEST_CASE("simulate stage writes the four-file layout ingest consumes") {
  const auto dir = temp_dir("simulate");
  SimConfig cfg;
  cfg.n_products = 4;
  cfg.n_retailers = 2;
  cfg.end_month = {2020, 6};
  csv::write_file(dir / "sim.json", sim_config_to_json(cfg));
  run_simulate({dir / "sim.json", dir / "raw"});
  IngestArgs ingest{dir / "raw" / "products.csv", dir / "raw" / "offers.csv",
                    dir / "raw" / "clicks.csv", dir / "raw" / "retailers.csv",
                    dir / "ingested", true};
  const auto summary = run_ingest(ingest);
  CHECK(summary.products_rows == 4);
  CHECK(summary.rejects == 0);
}
