#include "pricepanel/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "pricepanel/csv.hpp"
#include "pricepanel/format.hpp"
#include "pricepanel/student_t.hpp"

namespace pricepanel {

StarScheme StarScheme::paper() {
  return StarScheme{{{0.01, "***"}, {0.05, "**"}, {0.10, "*"}, {0.15, "."}}};
}

std::string stars(double p, const StarScheme& scheme) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("p outside [0, 1]");
  for (const auto& th : scheme.thresholds) {
    if (p < th.p) return th.label;
  }
  return "";
}

std::optional<DiDWindow> parse_window(std::string_view s) {
  if (s == "full") return DiDWindow::full();
  if (s == "6" || s == "6m") return DiDWindow::six();
  if (s == "12" || s == "12m") return DiDWindow::twelve();
  return std::nullopt;
}

namespace {

// Window bins on each side, over the fit's bin grid for "full".
std::pair<std::vector<int>, std::vector<int>> window_bins(
    const EventStudyFit& fit, DiDWindow window) {
  std::vector<int> pre, post;
  if (window.months) {
    const int w = *window.months;
    if (w < 3 || w % 3 != 0) {
      throw std::invalid_argument("window must be a positive multiple of 3");
    }
    for (int b = -w; b <= -3; b += 3) pre.push_back(b);
    for (int b = 3; b <= w; b += 3) post.push_back(b);
  } else {
    std::set<int> grid(fit.bins.begin(), fit.bins.end());
    grid.insert(fit.dropped_bins.begin(), fit.dropped_bins.end());
    for (const int b : grid) {
      if (b < 0) pre.push_back(b);
      if (b > 0) post.push_back(b);
    }
  }
  return {pre, post};
}

DiDSummary contrast_summary(const EventStudyFit& fit,
                            const std::map<int, double>& contrast,
                            double estimate, const std::string& label, int dof,
                            const StarScheme& scheme) {
  DiDSummary out;
  out.window = label;
  out.estimate = estimate;
  out.contrast = contrast;
  out.dof = dof;
  double var = 0.0;
  if (fit.vcov_valid) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fit.bins.size()));
    for (const auto& [bin, w] : contrast) {
      const auto pos = fit.bin_position(bin);
      if (pos) c(static_cast<Eigen::Index>(*pos)) = w;
    }
    var = c.dot(fit.vcov * c);
  }
  out.se = std::sqrt(std::max(var, 0.0));
  const TPValue tp = t_pvalue(out.estimate, out.se, std::max(dof, 1));
  out.t = tp.t;
  out.p = tp.p;
  out.degenerate = tp.degenerate;
  out.stars = stars(out.p, scheme);
  return out;
}

}  // namespace

DiDSummary did_window(const EventStudyFit& fit, DiDWindow window,
                      const DiDOptions& opts) {
  const auto [pre, post] = window_bins(fit, window);
  std::vector<int> pre_present, post_present, missing;
  for (const int b : pre) {
    if (fit.bin_position(b)) {
      pre_present.push_back(b);
    } else {
      missing.push_back(b);
    }
  }
  for (const int b : post) {
    if (fit.bin_position(b)) {
      post_present.push_back(b);
    } else {
      missing.push_back(b);
    }
  }
  if (opts.strict && !missing.empty()) {
    throw std::runtime_error("window bins missing from the fit (strict mode)");
  }
  if (pre_present.empty() || post_present.empty()) {
    throw std::runtime_error("empty window side for DiD(" + window.label() +
                             ")");
  }

  std::map<int, double> contrast;
  double estimate = 0.0;
  const double w_post = 1.0 / static_cast<double>(post_present.size());
  for (const int b : post_present) {
    contrast[b] = w_post;
    estimate += w_post * fit.beta[*fit.bin_position(b)];
  }
  const double w_pre = -1.0 / static_cast<double>(pre_present.size());
  for (const int b : pre_present) {
    contrast[b] = w_pre;
    estimate += w_pre * fit.beta[*fit.bin_position(b)];
  }

  DiDSummary out = contrast_summary(fit, contrast, estimate, window.label(),
                                    fit.dof_inference, opts.scheme);
  out.missing_bins = std::move(missing);
  std::sort(out.missing_bins.begin(), out.missing_bins.end());
  return out;
}

DiDSummary did_treated_minus_control(const EventStudyFit& fit_treated,
                                     const EventStudyFit& fit_control,
                                     DiDWindow window,
                                     const CrossDiDOptions& opts) {
  const DiDOptions side{opts.strict, opts.scheme};
  const DiDSummary t_side = did_window(fit_treated, window, side);
  const DiDSummary c_side = did_window(fit_control, window, side);

  DiDSummary out;
  out.window = window.label();
  out.estimate = t_side.estimate - c_side.estimate;
  out.se = std::sqrt(t_side.se * t_side.se + c_side.se * c_side.se);
  out.dof = opts.conservative_dof
                ? std::min(fit_treated.dof_inference, fit_control.dof_inference)
                : fit_treated.dof_inference;
  const TPValue tp = t_pvalue(out.estimate, out.se, std::max(out.dof, 1));
  out.t = tp.t;
  out.p = tp.p;
  out.degenerate = tp.degenerate;
  out.stars = stars(out.p, opts.scheme);
  out.contrast = t_side.contrast;
  out.missing_bins = t_side.missing_bins;
  for (const int b : c_side.missing_bins) {
    if (!std::binary_search(out.missing_bins.begin(), out.missing_bins.end(), b)) {
      out.missing_bins.push_back(b);
    }
  }
  std::sort(out.missing_bins.begin(), out.missing_bins.end());
  return out;
}

namespace {

struct CellBlock {
  std::string est;  // without stars
  std::string star;
  std::string se;
  std::string t;
  std::string p;
};

std::optional<CellBlock> bin_cells(const EventStudyFit& fit, int bin,
                                   const StarScheme& scheme) {
  const auto pos = fit.bin_position(bin);
  if (!pos) return std::nullopt;
  CellBlock out;
  const double est = fit.beta[*pos];
  out.est = format_fixed(est, 2);
  if (fit.vcov_valid) {
    const double se = fit.se(*pos);
    const TPValue tp = t_pvalue(est, se, std::max(fit.dof_inference, 1));
    out.star = stars(tp.p, scheme);
    out.se = format_fixed(se, 2);
    out.t = format_fixed(tp.t, 2);
    out.p = format_fixed(tp.p, 2);
  }
  return out;
}

std::vector<int> table_bins(const EventStudyFit& fit_treated,
                            const EventStudyFit* fit_control) {
  std::set<int> bins(fit_treated.bins.begin(), fit_treated.bins.end());
  if (fit_control) bins.insert(fit_control->bins.begin(), fit_control->bins.end());
  return {bins.begin(), bins.end()};
}

std::string footer_value(const EventStudyFit& fit, int row) {
  switch (row) {
    case 0: return std::to_string(fit.n_obs);
    case 1: return format_fixed(fit.rmse, 2);
    case 2: return fit.adj_r2 ? format_fixed(*fit.adj_r2, 2) : "";
    default: return fit.within_r2 ? format_fixed(*fit.within_r2, 2) : "";
  }
}

const char* kFooterLabels[4] = {"Observations", "RMSE", "Adj. R2",
                                "Within R2"};
const char* kFooterLabelsTex[4] = {"Observations", "RMSE", "Adj. R$^2$",
                                   "Within R$^2$"};

std::string render_csv(const EventStudyFit& fit_treated,
                       const EventStudyFit* fit_control,
                       const StarScheme& scheme) {
  std::string out;
  auto block_header = [](const std::string& prefix) {
    return prefix + "_est," + prefix + "_stars," + prefix + "_se," + prefix +
           "_t," + prefix + "_p";
  };
  if (fit_control) {
    out = "bin," + block_header("treated") + "," + block_header("control") + "\n";
  } else {
    out = "bin," + block_header("treated") + "\n";
  }
  auto append_block = [&](std::string& line, const std::optional<CellBlock>& b) {
    if (b) {
      line += "," + b->est + "," + b->star + "," + b->se + "," + b->t + "," + b->p;
    } else {
      line += ",,,,,";
    }
  };
  for (const int bin : table_bins(fit_treated, fit_control)) {
    std::string line = std::to_string(bin);
    append_block(line, bin_cells(fit_treated, bin, scheme));
    if (fit_control) append_block(line, bin_cells(*fit_control, bin, scheme));
    out += line + "\n";
  }
  for (int row = 0; row < 4; ++row) {
    std::string line = std::string(kFooterLabels[row]);
    line += "," + footer_value(fit_treated, row) + ",,,,";
    if (fit_control) line += "," + footer_value(*fit_control, row) + ",,,,";
    out += line + "\n";
  }
  return out;
}

std::string render_latex(const EventStudyFit& fit_treated,
                         const EventStudyFit* fit_control,
                         const StarScheme& scheme) {
  const bool two = fit_control != nullptr;
  std::string out;
  out += two ? "\\begin{tabular}{lcccccccc}\n" : "\\begin{tabular}{lcccc}\n";
  out += "\\toprule\n";
  if (two) {
    out +=
        " & \\multicolumn{4}{c}{\\textbf{Treated}} & "
        "\\multicolumn{4}{c}{\\textbf{Control}} \\\\\n";
    out += "\\cmidrule(lr){2-5}\\cmidrule(lr){6-9}\n";
  }
  out += "Event Bin & Est. & SE & t & p";
  if (two) out += " & Est. & SE & t & p";
  out += " \\\\\n\\midrule\n";
  auto tex_block = [&](const std::optional<CellBlock>& b) {
    if (!b) return std::string(" &  &  &  & ");
    std::string est = b->est;
    if (!b->star.empty()) est += "$^{" + b->star + "}$";
    return " & " + est + " & " + b->se + " & " + b->t + " & " + b->p;
  };
  for (const int bin : table_bins(fit_treated, fit_control)) {
    std::string line = std::to_string(bin);
    line += tex_block(bin_cells(fit_treated, bin, scheme));
    if (two) line += tex_block(bin_cells(*fit_control, bin, scheme));
    out += line + " \\\\\n";
  }
  out += "\\midrule\n";
  for (int row = 0; row < 4; ++row) {
    std::string line = std::string(kFooterLabelsTex[row]);
    line += " & \\multicolumn{4}{c}{" + footer_value(fit_treated, row) + "}";
    if (two) {
      line += " & \\multicolumn{4}{c}{" + footer_value(*fit_control, row) + "}";
    }
    out += line + " \\\\\n";
  }
  out += "\\bottomrule\n\\end{tabular}\n";
  return out;
}

}  // namespace

std::string render_table(const EventStudyFit& fit_treated,
                         const EventStudyFit* fit_control, TableFormat format,
                         const StarScheme& scheme) {
  return format == TableFormat::csv
             ? render_csv(fit_treated, fit_control, scheme)
             : render_latex(fit_treated, fit_control, scheme);
}

PlotSeries export_plot_data(const EventStudyFit& fit, double level) {
  if (!fit.vcov_valid) {
    throw std::runtime_error("plot data requires a fit with a covariance");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("confidence level must be in (0, 1)");
  }
  const double q = student_t_quantile(0.5 + level / 2.0,
                                      std::max(fit.dof_inference, 1));
  PlotSeries out;
  out.group = fit.sample_label.empty() ? "sample" : fit.sample_label;
  for (std::size_t i = 0; i <= fit.bins.size(); ++i) {
    // Insert the reference bin at its sorted position.
    const bool at_ref =
        (i == fit.bins.size() || fit.bins[i] > fit.ref_bin) &&
        (i == 0 || fit.bins[i - 1] < fit.ref_bin);
    if (at_ref) out.points.push_back(PlotPoint{fit.ref_bin, 0.0, 0.0, 0.0});
    if (i == fit.bins.size()) break;
    const double est = fit.beta[i];
    const double se = fit.se(i);
    out.points.push_back(PlotPoint{fit.bins[i], est, est - q * se, est + q * se});
  }
  return out;
}

std::string plot_series_to_csv(const std::vector<PlotSeries>& series) {
  std::string out = "bin,group,estimate,lo90,hi90\n";
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      const std::vector<std::string> fields = {
          std::to_string(p.bin), s.group, format_double(p.estimate),
          format_double(p.lower), format_double(p.upper)};
      out += csv::make_row(fields);
      out += '\n';
    }
  }
  return out;
}

}  // namespace pricepanel
