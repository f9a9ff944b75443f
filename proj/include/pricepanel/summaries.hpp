#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pricepanel/estimator.hpp"

namespace pricepanel {

// Significance thresholds, ascending; the first one exceeding p wins.
struct StarScheme {
  struct Threshold {
    double p;
    std::string label;
  };
  std::vector<Threshold> thresholds;

  // *** p<.01, ** p<.05, * p<.10, . p<.15
  static StarScheme paper();
};

std::string stars(double p, const StarScheme& scheme = StarScheme::paper());

struct DiDWindow {
  // months = 6 or 12: pre {-w..-3}, post {3..w}. full: all grid bins <0 / >0.
  std::optional<int> months;
  static DiDWindow six() { return {6}; }
  static DiDWindow twelve() { return {12}; }
  static DiDWindow full() { return {std::nullopt}; }
  std::string label() const {
    return months ? std::to_string(*months) + "m" : "full";
  }
};

std::optional<DiDWindow> parse_window(std::string_view s);  // "6", "12", "full"

struct DiDSummary {
  std::string window;
  double estimate = 0.0;
  double se = 0.0;
  double t = 0.0;
  double p = 1.0;
  bool degenerate = false;  // se was zero
  std::string stars;
  int dof = 0;
  std::map<int, double> contrast;  // weight per estimated bin
  std::vector<int> missing_bins;   // window bins absent from the fit
};

struct DiDOptions {
  bool strict = false;  // error instead of reweighting around missing bins
  StarScheme scheme = StarScheme::paper();
};

// Mean of post-window betas minus mean of pre-window betas, with the delta
// method over the fit covariance. Missing bins are excluded and the side
// weights rescaled so they still sum to +/-1 (strict mode errors instead).
DiDSummary did_window(const EventStudyFit& fit, DiDWindow window,
                      const DiDOptions& opts = {});

struct CrossDiDOptions {
  bool strict = false;
  bool conservative_dof = false;  // min of the two fits instead of treated's
  StarScheme scheme = StarScheme::paper();
};

// DiD_T(w) - DiD_C(w); the fits come from separate regressions on disjoint
// samples, so the variances add.
DiDSummary did_treated_minus_control(const EventStudyFit& fit_treated,
                                     const EventStudyFit& fit_control,
                                     DiDWindow window,
                                     const CrossDiDOptions& opts = {});

enum class TableFormat { csv, latex };

// Side-by-side event-study table (treated | control) with star-annotated
// estimates and an Observations/RMSE/Adj R2/Within R2 footer; two decimal
// places throughout. Without a control fit a single block is rendered.
std::string render_table(const EventStudyFit& fit_treated,
                         const EventStudyFit* fit_control, TableFormat format,
                         const StarScheme& scheme = StarScheme::paper());

struct PlotPoint {
  int bin = 0;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct PlotSeries {
  std::string group;
  std::vector<PlotPoint> points;  // ascending bins, reference included at 0
};

// Per-bin CIs: estimate +/- t_quantile((1+level)/2, dof) * se. The reference
// bin is emitted with estimate 0 and a zero-width interval.
PlotSeries export_plot_data(const EventStudyFit& fit, double level = 0.90);

// bin,group,estimate,lo90,hi90
std::string plot_series_to_csv(const std::vector<PlotSeries>& series);

}  // namespace pricepanel
