#include "pricepanel/stages.hpp"

#include <stdexcept>

#include <json.hpp>

#include "pricepanel/csv.hpp"
#include "pricepanel/digest.hpp"
#include "pricepanel/ingest.hpp"
#include "pricepanel/manifest.hpp"
#include "pricepanel/pipeline.hpp"
#include "pricepanel/simulate.hpp"
#include "pricepanel/version.hpp"

namespace pricepanel {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::string text;
  for (const auto& line : csv::read_lines(path)) {
    text += line;
    text += '\n';
  }
  return text;
}

nlohmann::json diagnostics_json(const BuildPanelArgs& args,
                                std::size_t cohort, const SampleSplit& split,
                                const IndexDiagnostics& idx,
                                std::size_t cells, std::size_t obs_rows) {
  nlohmann::json j;
  j["base_month"] = format_month(args.base_month);
  j["window"] = std::to_string(args.window.lo) + ":" +
                std::to_string(args.window.hi);
  j["cohort_products"] = cohort;
  j["sup_products"] = split.sup_products;
  j["control_products"] = split.control_products;
  j["strict_products"] = split.strict_products;
  j["pairs_without_base"] = idx.pairs_without_base;
  j["zero_base_pairs"] = idx.zero_base_pairs;
  j["cells"] = cells;
  j["obs_rows"] = obs_rows;
  j["treated_rows"] = split.treated.size();
  j["control_rows"] = split.control.size();
  j["strict_rows"] = split.strict.size();
  return j;
}

}  // namespace

IngestSummary run_ingest(const IngestArgs& args) {
  auto products = load_products(args.products);
  auto offers = load_offers(args.offers);
  auto clicks = load_clicks(args.clicks);
  auto retailers = load_retailers(args.retailers);

  std::vector<RejectRow> rejects;
  auto collect = [&rejects](auto& result) {
    rejects.insert(rejects.end(), result.rejects.begin(), result.rejects.end());
  };
  collect(products);
  collect(offers);
  collect(clicks);
  collect(retailers);

  const RefCheckResult refs =
      check_references(products.rows, retailers.rows, offers.rows, clicks.rows,
                       args.strict_refs, rejects);

  const RetailerTable snapshot = retailer_snapshot(retailers.rows);

  fs::create_directories(args.out_dir);
  csv::write_file(args.out_dir / "products.csv", products_to_csv(products.rows));
  csv::write_file(args.out_dir / "offers.csv", offers_to_csv(offers.rows));
  csv::write_file(args.out_dir / "clicks.csv", clicks_to_csv(clicks.rows));
  csv::write_file(args.out_dir / "retailers.csv",
                  retailers_to_csv(retailers.rows));
  csv::write_file(args.out_dir / "retailer_snapshot.csv",
                  retailers_to_csv(snapshot));
  csv::write_file(args.out_dir / "rejects.csv", rejects_to_csv(rejects));

  IngestSummary summary;
  summary.products_rows = products.rows.size();
  summary.offers_rows = offers.rows.size();
  summary.clicks_rows = clicks.rows.size();
  summary.retailers_rows = retailers.rows.size();
  summary.rejects = rejects.size();
  summary.ref_warnings = args.strict_refs ? 0 : refs.total();

  nlohmann::json j;
  j["products_rows"] = summary.products_rows;
  j["offers_rows"] = summary.offers_rows;
  j["clicks_rows"] = summary.clicks_rows;
  j["retailers_rows"] = summary.retailers_rows;
  j["rejected_rows"] = summary.rejects;
  j["referential_warnings"] = summary.ref_warnings;
  j["strict_refs"] = args.strict_refs;
  csv::write_file(args.out_dir / "ingest_summary.json", j.dump(2) + "\n");
  return summary;
}

BuildPanelSummary run_build_panel(const BuildPanelArgs& args) {
  if (args.window.lo > args.window.hi) {
    throw std::runtime_error("empty event window");
  }
  if (!fs::exists(args.patterns)) {
    throw std::runtime_error("patterns file not found");
  }
  const SupPatternSet patterns = SupPatternSet::load(args.patterns);

  const auto products = load_products(args.in_dir / "products.csv");
  const auto offers = load_offers(args.in_dir / "offers.csv");
  const auto clicks = load_clicks(args.in_dir / "clicks.csv");
  const auto retailers = load_retailers(args.in_dir / "retailers.csv");
  const RetailerTable snapshot = retailer_snapshot(retailers.rows);

  const ProductTable cohort = filter_cohort(products.rows);
  const auto cohort_ids = id_set(cohort);

  const auto timed_offers = attach_time(offers.rows, args.base_month);
  const auto timed_clicks = attach_time(clicks.rows, args.base_month);
  const auto win_offers =
      apply_event_window(timed_offers, cohort_ids, args.window);
  const auto win_clicks =
      apply_event_window(timed_clicks, cohort_ids, args.window);

  const PanelOptions popts{args.base_month, args.window};
  const MonthlyPanel monthly = aggregate_monthly(win_offers, win_clicks, popts);
  IndexedPanel indexed = build_index(monthly.cells, args.base_month);
  const ObsTable obs =
      assemble_obs(std::move(indexed.rows), monthly.clicks, snapshot);
  const SampleSplit split = split_samples(obs, cohort, patterns);

  fs::create_directories(args.out_dir);
  csv::write_file(args.out_dir / "obs.csv", obs_to_csv(obs));
  csv::write_file(args.out_dir / "obs_treated.csv", obs_to_csv(split.treated));
  csv::write_file(args.out_dir / "obs_control.csv", obs_to_csv(split.control));
  csv::write_file(args.out_dir / "obs_strict.csv", obs_to_csv(split.strict));
  csv::write_file(
      args.out_dir / "diagnostics.json",
      diagnostics_json(args, cohort.size(), split, indexed.diagnostics,
                       monthly.cells.size(), obs.size())
              .dump(2) +
          "\n");

  return BuildPanelSummary{cohort.size(), split.sup_products, obs.size()};
}

EventStudyFit run_fit(const FitArgs& args) {
  if (args.cluster != "prod,ret") {
    throw std::runtime_error("unsupported cluster spec '" + args.cluster +
                             "' (only prod,ret)");
  }
  const ObsTable obs = obs_from_csv(args.panel);
  FitOptions opts;
  opts.ref_bin = args.ref_bin;
  opts.ssc = args.ssc;
  opts.rmse_df_adjust = args.rmse_df_adjust;
  const RegressionSample sample =
      RegressionSample::from_observations(obs, args.outcome, opts.window);
  EventStudyFit fit = fit_event_study(sample, opts);
  fit.outcome = outcome_name(args.outcome);
  fit.sample_label = args.label.empty() ? "sample" : args.label;
  if (!args.out.empty()) {
    if (args.out.has_parent_path()) fs::create_directories(args.out.parent_path());
    csv::write_file(args.out, fit_to_json(fit));
  }
  return fit;
}

namespace {

nlohmann::json did_to_json(const DiDSummary& s) {
  nlohmann::json j;
  j["window"] = s.window;
  j["estimate"] = s.estimate;
  j["se"] = s.se;
  j["t"] = s.t;
  j["p"] = s.p;
  j["stars"] = s.stars;
  j["dof"] = s.dof;
  j["degenerate_se"] = s.degenerate;
  nlohmann::json contrast = nlohmann::json::object();
  for (const auto& [bin, w] : s.contrast) contrast[std::to_string(bin)] = w;
  j["contrast"] = contrast;
  j["missing_bins"] = s.missing_bins;
  return j;
}

}  // namespace

void run_did(const DidArgs& args) {
  const EventStudyFit fit_t = fit_from_json(args.fit_treated);
  std::optional<EventStudyFit> fit_c;
  if (args.fit_control) fit_c = fit_from_json(*args.fit_control);

  nlohmann::json windows = nlohmann::json::array();
  for (const auto& wtext : args.windows) {
    const auto window = parse_window(wtext);
    if (!window) throw std::runtime_error("bad window '" + wtext + "'");
    nlohmann::json entry;
    entry["window"] = window->label();
    entry["treated"] = did_to_json(did_window(fit_t, *window));
    if (fit_c) {
      entry["control"] = did_to_json(did_window(*fit_c, *window));
      CrossDiDOptions copts;
      copts.conservative_dof = args.conservative_dof;
      entry["treated_minus_control"] =
          did_to_json(did_treated_minus_control(fit_t, *fit_c, *window, copts));
    }
    windows.push_back(entry);
  }
  nlohmann::json j;
  j["version"] = kVersion;
  j["windows"] = windows;
  if (args.out.has_parent_path()) fs::create_directories(args.out.parent_path());
  csv::write_file(args.out, j.dump(2) + "\n");
}

std::filesystem::path run_report(const ReportArgs& args) {
  const EventStudyFit fit_t = fit_from_json(args.fit_treated);
  std::optional<EventStudyFit> fit_c;
  if (args.fit_control) fit_c = fit_from_json(*args.fit_control);
  const std::string table = render_table(
      fit_t, fit_c ? &*fit_c : nullptr, args.format);
  fs::create_directories(args.out_dir);
  const fs::path out =
      args.out_dir /
      (args.format == TableFormat::csv ? "event_study.csv" : "event_study.tex");
  csv::write_file(out, table);
  return out;
}

void run_plot_data(const PlotDataArgs& args) {
  std::vector<PlotSeries> series;
  for (const auto& path : args.fits) {
    series.push_back(export_plot_data(fit_from_json(path), args.level));
  }
  if (args.out.has_parent_path()) fs::create_directories(args.out.parent_path());
  csv::write_file(args.out, plot_series_to_csv(series));
}

void run_simulate(const SimulateArgs& args) {
  const SimConfig cfg = sim_config_from_json(args.config);
  const SimOutput sim = generate(cfg);
  fs::create_directories(args.out_dir);
  csv::write_file(args.out_dir / "products.csv", products_to_csv(sim.products));
  csv::write_file(args.out_dir / "offers.csv", offers_to_csv(sim.offers));
  csv::write_file(args.out_dir / "clicks.csv", clicks_to_csv(sim.clicks));
  csv::write_file(args.out_dir / "retailers.csv",
                  retailers_to_csv(sim.retailers));
}

RunAllResult run_all(const fs::path& config_path,
                     const std::string& command_line) {
  if (!fs::exists(config_path)) {
    throw std::runtime_error("run-all: config file not found");
  }
  const std::string config_text = read_text(config_path);
  const nlohmann::json cfg = nlohmann::json::parse(config_text);

  RunManifest manifest;
  manifest.command = command_line;
  manifest.version = kVersion;
  manifest.config_sha256 = sha256_hex(config_text);
  manifest.started_utc = utc_now_iso8601();

  const fs::path out_dir = cfg.value("out_dir", "out");
  fs::create_directories(out_dir);

  auto stage = [](const char* name, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string(name) + ": " + e.what());
    }
  };

  // simulate (optional)
  IngestArgs ingest_args;
  const auto sim_cfg = cfg.find("simulate");
  if (sim_cfg != cfg.end() && sim_cfg->value("enabled", false)) {
    stage("simulate", [&] {
      const SimConfig sc = sim_config_from_json_text(sim_cfg->dump());
      const SimOutput sim = generate(sc);
      const fs::path dir = out_dir / "sim";
      fs::create_directories(dir);
      csv::write_file(dir / "products.csv", products_to_csv(sim.products));
      csv::write_file(dir / "offers.csv", offers_to_csv(sim.offers));
      csv::write_file(dir / "clicks.csv", clicks_to_csv(sim.clicks));
      csv::write_file(dir / "retailers.csv", retailers_to_csv(sim.retailers));
    });
    ingest_args.products = out_dir / "sim" / "products.csv";
    ingest_args.offers = out_dir / "sim" / "offers.csv";
    ingest_args.clicks = out_dir / "sim" / "clicks.csv";
    ingest_args.retailers = out_dir / "sim" / "retailers.csv";
  }

  const auto ingest_cfg = cfg.find("ingest");
  if (ingest_cfg != cfg.end()) {
    if (ingest_cfg->contains("products")) {
      ingest_args.products = ingest_cfg->at("products").get<std::string>();
    }
    if (ingest_cfg->contains("offers")) {
      ingest_args.offers = ingest_cfg->at("offers").get<std::string>();
    }
    if (ingest_cfg->contains("clicks")) {
      ingest_args.clicks = ingest_cfg->at("clicks").get<std::string>();
    }
    if (ingest_cfg->contains("retailers")) {
      ingest_args.retailers = ingest_cfg->at("retailers").get<std::string>();
    }
    ingest_args.strict_refs = ingest_cfg->value("strict_refs", false);
  }
  if (ingest_args.products.empty()) {
    throw std::runtime_error(
        "ingest: no input files (enable simulate or configure ingest paths)");
  }
  ingest_args.out_dir = out_dir / "ingest";
  stage("ingest", [&] {
    manifest.add_input(ingest_args.products);
    manifest.add_input(ingest_args.offers);
    manifest.add_input(ingest_args.clicks);
    manifest.add_input(ingest_args.retailers);
    run_ingest(ingest_args);
  });

  BuildPanelArgs panel_args;
  panel_args.in_dir = ingest_args.out_dir;
  panel_args.out_dir = out_dir / "panel";
  const auto panel_cfg = cfg.find("build_panel");
  if (panel_cfg == cfg.end() || !panel_cfg->contains("patterns")) {
    throw std::runtime_error("build-panel: patterns file not configured");
  }
  panel_args.patterns = panel_cfg->at("patterns").get<std::string>();
  if (panel_cfg->contains("base_month")) {
    const auto m = parse_month(panel_cfg->at("base_month").get<std::string>());
    if (!m) throw std::runtime_error("build-panel: bad base_month");
    panel_args.base_month = *m;
  }
  if (panel_cfg->contains("window")) {
    const std::string w = panel_cfg->at("window").get<std::string>();
    const auto colon = w.find(':');
    if (colon == std::string::npos) {
      throw std::runtime_error("build-panel: bad window (want lo:hi)");
    }
    panel_args.window.lo = std::stoi(w.substr(0, colon));
    panel_args.window.hi = std::stoi(w.substr(colon + 1));
  }
  stage("build-panel", [&] { run_build_panel(panel_args); });

  const auto fit_cfg = cfg.find("fit");
  FitArgs fit_common;
  if (fit_cfg != cfg.end()) {
    if (fit_cfg->contains("outcome")) {
      const auto o = parse_outcome(fit_cfg->at("outcome").get<std::string>());
      if (!o) throw std::runtime_error("fit: bad outcome (want P or logP)");
      fit_common.outcome = *o;
    }
    fit_common.ref_bin = fit_cfg->value("ref_bin", 0);
    if (fit_cfg->contains("ssc")) {
      const auto s = parse_ssc(fit_cfg->at("ssc").get<std::string>());
      if (!s) throw std::runtime_error("fit: bad ssc (want none or standard)");
      fit_common.ssc = *s;
    }
  }
  const fs::path fit_dir = out_dir / "fit";
  std::vector<std::string> samples = {"treated", "control"};
  if (fit_cfg != cfg.end() && fit_cfg->contains("samples")) {
    samples = fit_cfg->at("samples").get<std::vector<std::string>>();
  }
  std::map<std::string, fs::path> fit_paths;
  for (const auto& label : samples) {
    stage("fit", [&] {
      FitArgs fa = fit_common;
      fa.panel = panel_args.out_dir / ("obs_" + label + ".csv");
      fa.label = label;
      fa.out = fit_dir / ("fit_" + label + ".json");
      run_fit(fa);
      fit_paths[label] = fa.out;
    });
  }

  DidArgs did_args;
  if (!fit_paths.contains("treated")) {
    throw std::runtime_error("did: no treated fit configured");
  }
  did_args.fit_treated = fit_paths.at("treated");
  if (fit_paths.contains("control")) {
    did_args.fit_control = fit_paths.at("control");
  }
  const auto did_cfg = cfg.find("did");
  if (did_cfg != cfg.end() && did_cfg->contains("windows")) {
    did_args.windows = did_cfg->at("windows").get<std::vector<std::string>>();
  }
  did_args.out = out_dir / "did" / "did.json";
  stage("did", [&] { run_did(did_args); });

  ReportArgs report_args;
  report_args.fit_treated = did_args.fit_treated;
  report_args.fit_control = did_args.fit_control;
  const auto report_cfg = cfg.find("report");
  if (report_cfg != cfg.end() && report_cfg->contains("format")) {
    const std::string f = report_cfg->at("format").get<std::string>();
    if (f == "latex") {
      report_args.format = TableFormat::latex;
    } else if (f == "csv") {
      report_args.format = TableFormat::csv;
    } else {
      throw std::runtime_error("report: bad format (want csv or latex)");
    }
  }
  report_args.out_dir = out_dir / "report";
  fs::path report_path;
  stage("report", [&] { report_path = run_report(report_args); });

  PlotDataArgs plot_args;
  plot_args.fits.push_back(did_args.fit_treated);
  if (did_args.fit_control) plot_args.fits.push_back(*did_args.fit_control);
  const auto plot_cfg = cfg.find("plot_data");
  if (plot_cfg != cfg.end()) {
    plot_args.level = plot_cfg->value("level", 0.90);
  }
  plot_args.out = out_dir / "plot" / "series.csv";
  stage("plot-data", [&] { run_plot_data(plot_args); });

  manifest.add_output(panel_args.out_dir / "obs.csv");
  manifest.add_output(panel_args.out_dir / "obs_treated.csv");
  manifest.add_output(panel_args.out_dir / "obs_control.csv");
  manifest.add_output(panel_args.out_dir / "obs_strict.csv");
  manifest.add_output(panel_args.out_dir / "diagnostics.json");
  for (const auto& [label, path] : fit_paths) manifest.add_output(path);
  manifest.add_output(did_args.out);
  manifest.add_output(report_path);
  manifest.add_output(plot_args.out);
  manifest.finished_utc = utc_now_iso8601();

  RunAllResult result;
  result.out_dir = out_dir;
  result.manifest_path = out_dir / "run_manifest.json";
  csv::write_file(result.manifest_path, manifest.to_json());
  return result;
}

}  // namespace pricepanel
