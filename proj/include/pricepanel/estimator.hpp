#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pricepanel/calendar.hpp"
#include "pricepanel/pipeline.hpp"

namespace pricepanel {

enum class Outcome { level_index, log_index };
enum class SscMode { none, standard };

const char* outcome_name(Outcome o);
std::optional<Outcome> parse_outcome(std::string_view s);
const char* ssc_name(SscMode m);
std::optional<SscMode> parse_ssc(std::string_view s);

struct FitOptions {
  double tol = 1e-8;           // max absolute per-sweep change
  int max_iter = 10000;        // demeaning sweeps
  int ref_bin = 0;
  SscMode ssc = SscMode::standard;
  bool rmse_df_adjust = false;  // RMSE uses RSS/(n-k) instead of RSS/n
  EventWindow window{};
};

// Long-format regression input with dense product/retailer indices.
struct RegressionSample {
  struct Row {
    double y = 0.0;
    int bin = 0;
    std::int32_t prod = 0;
    std::int32_t ret = 0;
  };
  std::vector<Row> rows;
  std::vector<std::string> product_ids;   // dense index -> id
  std::vector<std::string> retailer_ids;

  int n_products() const { return static_cast<int>(product_ids.size()); }
  int n_retailers() const { return static_cast<int>(retailer_ids.size()); }

  // Rows with an absent outcome are excluded here. Bins must be multiples
  // of 3 inside the window.
  static RegressionSample from_observations(const ObsTable& obs, Outcome outcome,
                                            EventWindow window = {});
};

struct DemeanResult {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;         // one column per entry of `bins`
  std::vector<int> bins;     // candidate bins, ascending, reference excluded
  int iterations = 0;        // sweeps executed
  double final_delta = 0.0;  // max absolute change in the last sweep
};

// Alternating projections: demean outcome and bin dummies by product groups
// then retailer groups until the max absolute change per sweep drops below
// tol. Throws on non-convergence.
DemeanResult within_transform(const RegressionSample& sample, double tol = 1e-8,
                              int max_iter = 10000, int ref_bin = 0);

// Demeaned design restricted to the accepted columns, plus everything the
// covariance estimator needs.
struct ClusteredDesign {
  Eigen::MatrixXd x;                    // n x k demeaned accepted columns
  Eigen::VectorXd residuals;            // n
  Eigen::MatrixXd bread;                // (x'x)^-1
  std::vector<std::int32_t> prod_of_row;
  std::vector<std::int32_t> ret_of_row;
  int n_products = 0;
  int n_retailers = 0;
  int k_total = 0;                      // coefficients + absorbed FE levels
  SscMode ssc = SscMode::standard;
};

struct CgmResult {
  Eigen::MatrixXd vcov;      // after PSD repair
  Eigen::MatrixXd vcov_raw;  // V_prod + V_ret - V_pair before repair
  Eigen::MatrixXd v_prod;
  Eigen::MatrixXd v_ret;
  Eigen::MatrixXd v_pair;
  bool psd_repaired = false;
};

// Two-way cluster-robust covariance by inclusion-exclusion
// (product + retailer - product x retailer), with a per-term small-sample
// factor G/(G-1) * (n-1)/(n-k) in standard mode and a spectral clip of
// negative eigenvalues afterwards.
CgmResult cgm_vcov(const ClusteredDesign& design);

// One-way cluster-robust sandwich over an arbitrary row partition.
Eigen::MatrixXd one_way_cluster_vcov(const ClusteredDesign& design,
                                     std::span<const std::int32_t> cluster_of_row,
                                     int n_clusters);

struct FitStats {
  double rmse = 0.0;
  std::optional<double> adj_r2;
  std::optional<double> within_r2;
};

FitStats fit_statistics(const Eigen::VectorXd& y_original,
                        const Eigen::VectorXd& y_demeaned,
                        const Eigen::VectorXd& residuals, int k_total,
                        bool rmse_df_adjust = false);

struct EventStudyFit {
  std::vector<int> bins;        // estimated bins, ascending, reference excluded
  std::vector<double> beta;     // index points relative to the reference bin
  Eigen::MatrixXd vcov;         // |bins| x |bins|; valid iff vcov_valid
  bool vcov_valid = false;
  bool psd_repaired = false;
  std::int64_t n_obs = 0;
  int n_products = 0;
  int n_retailers = 0;
  int ref_bin = 0;
  std::vector<int> dropped_bins;  // empty or collinear, ascending
  double rmse = 0.0;
  std::optional<double> adj_r2;
  std::optional<double> within_r2;
  int dof_inference = 0;  // min(n_products, n_retailers) - 1
  int k_total = 0;
  int n_components = 0;   // connected components of the product-retailer graph
  int demean_iterations = 0;
  double demean_delta = 0.0;
  SscMode ssc = SscMode::standard;
  std::string outcome;
  std::string sample_label;

  double se(std::size_t i) const { return std::sqrt(vcov(i, i)); }
  std::optional<std::size_t> bin_position(int bin) const;
};

// Fit the event-study regression with absorbed product and retailer fixed
// effects. Coefficients are deviations from the reference bin; empty and
// collinear bins are dropped deterministically (scanned in ascending bin
// order). With fewer than two clusters in either dimension the fit is
// returned with vcov flagged absent.
EventStudyFit fit_event_study(const RegressionSample& sample,
                              const FitOptions& opts = {});

struct EventStudyFitDetail {
  EventStudyFit fit;
  ClusteredDesign design;
  Eigen::VectorXd y_original;
  Eigen::VectorXd y_demeaned;
};

EventStudyFitDetail fit_event_study_detailed(const RegressionSample& sample,
                                             const FitOptions& opts = {});

// Recovered fixed-effect levels for diagnostics; delta means are normalized
// to zero, alpha absorbs the grand mean.
struct FixedEffectsSolution {
  std::vector<double> alpha;  // per product
  std::vector<double> delta;  // per retailer
  int iterations = 0;
  double final_delta = 0.0;
};

FixedEffectsSolution recover_fixed_effects(const RegressionSample& sample,
                                           const EventStudyFit& fit,
                                           double tol = 1e-10,
                                           int max_iter = 10000);

// fit.json (de)serialization.
std::string fit_to_json(const EventStudyFit& fit);
EventStudyFit fit_from_json_text(const std::string& text);
EventStudyFit fit_from_json(const std::filesystem::path& path);

}  // namespace pricepanel
