#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "pricepanel/estimator.hpp"
#include "pricepanel/stages.hpp"
#include "pricepanel/version.hpp"

namespace {

std::string join_args(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

int run_tagged(const char* stage, const std::function<void()>& fn) {
  try {
    fn();
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: %s\n", stage, e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pricing-panel event-study toolkit"};
  app.set_version_flag("--version", std::string("pricepanel ") +
                                        pricepanel::kVersion);
  app.require_subcommand(1);

  // ingest
  pricepanel::IngestArgs ingest_args;
  auto* ingest = app.add_subcommand(
      "ingest", "Load and validate the four base relations");
  ingest->add_option("--products", ingest_args.products)->required();
  ingest->add_option("--offers", ingest_args.offers)->required();
  ingest->add_option("--clicks", ingest_args.clicks)->required();
  ingest->add_option("--retailers", ingest_args.retailers)->required();
  ingest->add_option("--out", ingest_args.out_dir)->required();
  ingest->add_flag("--strict-refs", ingest_args.strict_refs,
                   "Reject offers/clicks referencing unknown ids");

  // build-panel
  pricepanel::BuildPanelArgs panel_args;
  std::string base_month_text = "2022-02";
  std::string window_text = "-24:36";
  auto* panel = app.add_subcommand(
      "build-panel", "Cohort, window, classification, index, analysis table");
  panel->add_option("--in", panel_args.in_dir)->required();
  panel->add_option("--patterns", panel_args.patterns)->required();
  panel->add_option("--base-month", base_month_text);
  panel->add_option("--window", window_text, "Event window lo:hi in months");
  panel->add_option("--out", panel_args.out_dir)->required();

  // fit
  pricepanel::FitArgs fit_args;
  std::string outcome_text = "P";
  std::string ssc_text = "standard";
  std::string rmse_text = "n";
  auto* fit = app.add_subcommand("fit", "Event-study fixed-effects regression");
  fit->add_option("--panel", fit_args.panel)->required();
  fit->add_option("--outcome", outcome_text, "P or logP");
  fit->add_option("--ref-bin", fit_args.ref_bin);
  fit->add_option("--cluster", fit_args.cluster, "Cluster spec (prod,ret)");
  fit->add_option("--ssc", ssc_text, "Small-sample correction: none|standard");
  fit->add_option("--rmse-denominator", rmse_text, "n or n-k");
  fit->add_option("--label", fit_args.label, "Sample label stored in fit.json");
  fit->add_option("--out", fit_args.out)->required();

  // did
  pricepanel::DidArgs did_args;
  std::string windows_text = "6,12,full";
  std::string fit_control_text;
  auto* did = app.add_subcommand("did", "Windowed DiD summaries from fits");
  did->add_option("--fit-treated", did_args.fit_treated)->required();
  did->add_option("--fit-control", fit_control_text);
  did->add_option("--windows", windows_text, "Comma list of 6,12,full");
  did->add_flag("--conservative-dof", did_args.conservative_dof,
                "Use min(dof_T, dof_C) for treated-minus-control");
  did->add_option("--out", did_args.out)->required();

  // report
  pricepanel::ReportArgs report_args;
  std::string report_control_text;
  std::string format_text = "csv";
  auto* report = app.add_subcommand("report", "Render the event-study table");
  report->add_option("--fit-treated", report_args.fit_treated)->required();
  report->add_option("--fit-control", report_control_text);
  report->add_option("--format", format_text, "csv or latex");
  report->add_option("--out", report_args.out_dir)->required();

  // plot-data
  pricepanel::PlotDataArgs plot_args;
  std::vector<std::string> plot_fit_texts;
  auto* plot = app.add_subcommand("plot-data", "Per-bin confidence intervals");
  plot->add_option("--fit", plot_fit_texts, "fit.json (repeatable)")
      ->required();
  plot->add_option("--level", plot_args.level, "Confidence level");
  plot->add_option("--out", plot_args.out)->required();

  // simulate
  pricepanel::SimulateArgs sim_args;
  auto* simulate = app.add_subcommand(
      "simulate", "Generate synthetic raw relations with known pass-through");
  simulate->add_option("--config", sim_args.config)->required();
  simulate->add_option("--out", sim_args.out_dir)->required();

  // run-all
  std::filesystem::path runall_config;
  auto* runall = app.add_subcommand("run-all", "Full pipeline from one config");
  runall->add_option("--config", runall_config)->required();

  CLI11_PARSE(app, argc, argv);

  if (ingest->parsed()) {
    return run_tagged("ingest", [&] {
      const auto summary = pricepanel::run_ingest(ingest_args);
      std::printf(
          "ingest: products=%zu offers=%zu clicks=%zu retailers=%zu "
          "rejects=%zu\n",
          summary.products_rows, summary.offers_rows, summary.clicks_rows,
          summary.retailers_rows, summary.rejects);
      if (summary.ref_warnings > 0) {
        std::fprintf(stderr,
                     "ingest: warning: %zu rows reference unknown ids (kept; "
                     "use --strict-refs to reject)\n",
                     summary.ref_warnings);
      }
    });
  }
  if (panel->parsed()) {
    return run_tagged("build-panel", [&] {
      const auto m = pricepanel::parse_month(base_month_text);
      if (!m) throw std::runtime_error("bad base month '" + base_month_text + "'");
      panel_args.base_month = *m;
      const auto colon = window_text.find(':');
      if (colon == std::string::npos) {
        throw std::runtime_error("bad window '" + window_text + "' (want lo:hi)");
      }
      panel_args.window.lo = std::stoi(window_text.substr(0, colon));
      panel_args.window.hi = std::stoi(window_text.substr(colon + 1));
      const auto summary = pricepanel::run_build_panel(panel_args);
      std::printf("build-panel: cohort=%zu sup=%zu obs_rows=%zu\n",
                  summary.cohort_products, summary.sup_products,
                  summary.obs_rows);
    });
  }
  if (fit->parsed()) {
    return run_tagged("fit", [&] {
      const auto outcome = pricepanel::parse_outcome(outcome_text);
      if (!outcome) throw std::runtime_error("bad outcome '" + outcome_text + "'");
      fit_args.outcome = *outcome;
      const auto ssc = pricepanel::parse_ssc(ssc_text);
      if (!ssc) throw std::runtime_error("bad ssc '" + ssc_text + "'");
      fit_args.ssc = *ssc;
      if (rmse_text == "n-k") {
        fit_args.rmse_df_adjust = true;
      } else if (rmse_text != "n") {
        throw std::runtime_error("bad rmse denominator '" + rmse_text + "'");
      }
      const auto result = pricepanel::run_fit(fit_args);
      std::printf("fit: n=%lld bins=%zu dropped=%zu rmse=%.4f\n",
                  static_cast<long long>(result.n_obs), result.bins.size(),
                  result.dropped_bins.size(), result.rmse);
    });
  }
  if (did->parsed()) {
    return run_tagged("did", [&] {
      if (!fit_control_text.empty()) did_args.fit_control = fit_control_text;
      did_args.windows.clear();
      std::string token;
      for (const char c : windows_text + ",") {
        if (c == ',') {
          if (!token.empty()) did_args.windows.push_back(token);
          token.clear();
        } else {
          token += c;
        }
      }
      pricepanel::run_did(did_args);
    });
  }
  if (report->parsed()) {
    return run_tagged("report", [&] {
      if (!report_control_text.empty()) {
        report_args.fit_control = report_control_text;
      }
      if (format_text == "latex") {
        report_args.format = pricepanel::TableFormat::latex;
      } else if (format_text != "csv") {
        throw std::runtime_error("bad format '" + format_text + "'");
      }
      pricepanel::run_report(report_args);
    });
  }
  if (plot->parsed()) {
    return run_tagged("plot-data", [&] {
      for (const auto& f : plot_fit_texts) plot_args.fits.emplace_back(f);
      pricepanel::run_plot_data(plot_args);
    });
  }
  if (simulate->parsed()) {
    return run_tagged("simulate", [&] { pricepanel::run_simulate(sim_args); });
  }
  if (runall->parsed()) {
    try {
      const auto result =
          pricepanel::run_all(runall_config, join_args(argc, argv));
      std::printf("run-all: manifest %s\n",
                  result.manifest_path.string().c_str());
      return 0;
    } catch (const std::exception& e) {
      // Stage errors arrive already tagged with the stage name.
      std::fprintf(stderr, "%s\n", e.what());
      return 1;
    }
  }
  return 0;
}
