#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pricepanel/calendar.hpp"
#include "pricepanel/estimator.hpp"
#include "pricepanel/summaries.hpp"

namespace pricepanel {

// Stage drivers behind the CLI subcommands. Each throws std::runtime_error
// with a bare message; run_all re-tags messages with the stage name.

struct IngestArgs {
  std::filesystem::path products;
  std::filesystem::path offers;
  std::filesystem::path clicks;
  std::filesystem::path retailers;
  std::filesystem::path out_dir;
  bool strict_refs = false;
};

struct IngestSummary {
  std::size_t products_rows = 0, offers_rows = 0, clicks_rows = 0,
              retailers_rows = 0;
  std::size_t rejects = 0;
  std::size_t ref_warnings = 0;
};

IngestSummary run_ingest(const IngestArgs& args);

struct BuildPanelArgs {
  std::filesystem::path in_dir;
  std::filesystem::path patterns;
  YearMonth base_month = kDefaultBaseMonth;
  EventWindow window{};
  std::filesystem::path out_dir;
};

struct BuildPanelSummary {
  std::size_t cohort_products = 0;
  std::size_t sup_products = 0;
  std::size_t obs_rows = 0;
};

BuildPanelSummary run_build_panel(const BuildPanelArgs& args);

struct FitArgs {
  std::filesystem::path panel;
  Outcome outcome = Outcome::level_index;
  int ref_bin = 0;
  std::string cluster = "prod,ret";
  SscMode ssc = SscMode::standard;
  bool rmse_df_adjust = false;
  std::string label;
  std::filesystem::path out;
};

EventStudyFit run_fit(const FitArgs& args);

struct DidArgs {
  std::filesystem::path fit_treated;
  std::optional<std::filesystem::path> fit_control;
  std::vector<std::string> windows = {"6", "12", "full"};
  bool conservative_dof = false;
  std::filesystem::path out;
};

void run_did(const DidArgs& args);

struct ReportArgs {
  std::filesystem::path fit_treated;
  std::optional<std::filesystem::path> fit_control;
  TableFormat format = TableFormat::csv;
  std::filesystem::path out_dir;
};

std::filesystem::path run_report(const ReportArgs& args);

struct PlotDataArgs {
  std::vector<std::filesystem::path> fits;
  double level = 0.90;
  std::filesystem::path out;
};

void run_plot_data(const PlotDataArgs& args);

struct SimulateArgs {
  std::filesystem::path config;  // JSON SimConfig
  std::filesystem::path out_dir;
};

void run_simulate(const SimulateArgs& args);

// Whole-pipeline orchestration from one JSON config; writes a run manifest
// on success. Returns the manifest path.
struct RunAllResult {
  std::filesystem::path manifest_path;
  std::filesystem::path out_dir;
};

RunAllResult run_all(const std::filesystem::path& config_path,
                     const std::string& command_line);

}  // namespace pricepanel
