#include "pricepanel/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "pricepanel/parallel.hpp"

namespace pricepanel {

namespace {

// Demeaned column is treated as fully absorbed by the fixed effects when its
// mean square per original dummy entry falls below this.
constexpr double kAbsorbedTol = 1e-10;
// Relative tolerance on the residual norm in the incremental Cholesky scan.
constexpr double kCollinearTol = 1e-10;

std::vector<std::vector<std::int32_t>> group_rows(
    const std::vector<RegressionSample::Row>& rows, bool by_product,
    int n_groups) {
  std::vector<std::vector<std::int32_t>> groups(n_groups);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int g = by_product ? rows[r].prod : rows[r].ret;
    groups[g].push_back(static_cast<std::int32_t>(r));
  }
  return groups;
}

void demean_pass(Eigen::MatrixXd& m,
                 const std::vector<std::vector<std::int32_t>>& groups) {
  const std::size_t cols = static_cast<std::size_t>(m.cols());
  parallel_for(
      cols,
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j < hi; ++j) {
          double* col = m.col(static_cast<Eigen::Index>(j)).data();
          for (const auto& g : groups) {
            if (g.empty()) continue;
            double sum = 0.0;
            for (const std::int32_t r : g) sum += col[r];
            const double mean = sum / static_cast<double>(g.size());
            for (const std::int32_t r : g) col[r] -= mean;
          }
        }
      },
      2);
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

int count_components(const RegressionSample& sample) {
  UnionFind uf(sample.n_products() + sample.n_retailers());
  for (const auto& row : sample.rows) {
    uf.unite(row.prod, sample.n_products() + row.ret);
  }
  std::set<int> roots;
  for (int i = 0; i < sample.n_products() + sample.n_retailers(); ++i) {
    roots.insert(uf.find(i));
  }
  return static_cast<int>(roots.size());
}

double ssc_factor(SscMode mode, int n_clusters, Eigen::Index n, int k_total) {
  if (mode == SscMode::none) return 1.0;
  const double g = static_cast<double>(n_clusters);
  double factor = g / (g - 1.0);
  if (n > k_total) {
    factor *= (static_cast<double>(n) - 1.0) /
              (static_cast<double>(n) - static_cast<double>(k_total));
  }
  return factor;
}

Eigen::MatrixXd cluster_meat(const Eigen::MatrixXd& x,
                             const Eigen::VectorXd& residuals,
                             std::span<const std::int32_t> cluster_of_row,
                             int n_clusters) {
  const Eigen::Index k = x.cols();
  // Scores accumulate in ascending row order within each cluster, and the
  // outer products sum in ascending cluster order, so identical row
  // partitions produce bit-identical meats whatever dimension they came from.
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n_clusters, k);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    scores.row(cluster_of_row[static_cast<std::size_t>(r)]) +=
        residuals(r) * x.row(r);
  }
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
  for (int g = 0; g < n_clusters; ++g) {
    meat.noalias() += scores.row(g).transpose() * scores.row(g);
  }
  return meat;
}

}  // namespace

const char* outcome_name(Outcome o) {
  return o == Outcome::level_index ? "P" : "logP";
}

std::optional<Outcome> parse_outcome(std::string_view s) {
  if (s == "P") return Outcome::level_index;
  if (s == "logP") return Outcome::log_index;
  return std::nullopt;
}

const char* ssc_name(SscMode m) {
  return m == SscMode::standard ? "standard" : "none";
}

std::optional<SscMode> parse_ssc(std::string_view s) {
  if (s == "standard") return SscMode::standard;
  if (s == "none") return SscMode::none;
  return std::nullopt;
}

RegressionSample RegressionSample::from_observations(const ObsTable& obs,
                                                     Outcome outcome,
                                                     EventWindow window) {
  RegressionSample sample;
  std::map<std::string, std::int32_t> prod_index;
  std::map<std::string, std::int32_t> ret_index;
  for (const auto& row : obs) {
    const auto& y =
        outcome == Outcome::level_index ? row.level_index : row.log_index;
    if (!y) continue;
    if (!window.contains(row.e) || row.bin % 3 != 0) {
      throw std::invalid_argument("invalid bin " + std::to_string(row.bin) +
                                  " at event time " + std::to_string(row.e));
    }
    prod_index.try_emplace(row.prod_id, 0);
    ret_index.try_emplace(row.ret_id, 0);
  }
  for (auto& [id, idx] : prod_index) {
    idx = static_cast<std::int32_t>(sample.product_ids.size());
    sample.product_ids.push_back(id);
  }
  for (auto& [id, idx] : ret_index) {
    idx = static_cast<std::int32_t>(sample.retailer_ids.size());
    sample.retailer_ids.push_back(id);
  }
  for (const auto& row : obs) {
    const auto& y =
        outcome == Outcome::level_index ? row.level_index : row.log_index;
    if (!y) continue;
    sample.rows.push_back(Row{*y, row.bin, prod_index.at(row.prod_id),
                              ret_index.at(row.ret_id)});
  }
  return sample;
}

DemeanResult within_transform(const RegressionSample& sample, double tol,
                              int max_iter, int ref_bin) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  const Eigen::Index n = static_cast<Eigen::Index>(sample.rows.size());
  if (n == 0) throw std::invalid_argument("empty regression sample");

  std::set<int> present;
  for (const auto& row : sample.rows) present.insert(row.bin);
  DemeanResult out;
  for (const int b : present) {
    if (b != ref_bin) out.bins.push_back(b);
  }

  const Eigen::Index k = static_cast<Eigen::Index>(out.bins.size());
  // y occupies the last column so one pass demeans everything jointly.
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, k + 1);
  std::map<int, Eigen::Index> col_of_bin;
  for (Eigen::Index c = 0; c < k; ++c) col_of_bin[out.bins[c]] = c;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = sample.rows[static_cast<std::size_t>(r)];
    m(r, k) = row.y;
    if (row.bin != ref_bin) m(r, col_of_bin.at(row.bin)) = 1.0;
  }

  const auto prod_groups = group_rows(sample.rows, true, sample.n_products());
  const auto ret_groups = group_rows(sample.rows, false, sample.n_retailers());

  Eigen::MatrixXd prev(n, k + 1);
  int iter = 0;
  double delta = 0.0;
  for (; iter < max_iter; ) {
    prev = m;
    demean_pass(m, prod_groups);
    demean_pass(m, ret_groups);
    ++iter;
    delta = (m - prev).cwiseAbs().maxCoeff();
    if (delta < tol) break;
  }
  if (delta >= tol) {
    throw std::runtime_error(
        "within transformation did not converge after " +
        std::to_string(max_iter) +
        " sweeps; last change = " + std::to_string(delta));
  }
  out.y = m.col(k);
  out.x = m.leftCols(k);
  out.iterations = iter;
  out.final_delta = delta;
  return out;
}

Eigen::MatrixXd one_way_cluster_vcov(const ClusteredDesign& design,
                                     std::span<const std::int32_t> cluster_of_row,
                                     int n_clusters) {
  const Eigen::MatrixXd meat =
      cluster_meat(design.x, design.residuals, cluster_of_row, n_clusters);
  const double factor = ssc_factor(design.ssc, n_clusters, design.x.rows(),
                                   design.k_total);
  return factor * (design.bread * meat * design.bread);
}

CgmResult cgm_vcov(const ClusteredDesign& design) {
  if (design.n_products < 2 || design.n_retailers < 2) {
    throw std::invalid_argument(
        "two-way clustering needs at least 2 clusters per dimension");
  }
  const std::size_t n = design.prod_of_row.size();
  // Dense intersection clusters keyed by (prod, ret), ascending.
  std::map<std::pair<std::int32_t, std::int32_t>, std::int32_t> pair_index;
  for (std::size_t r = 0; r < n; ++r) {
    pair_index.try_emplace({design.prod_of_row[r], design.ret_of_row[r]}, 0);
  }
  std::int32_t next = 0;
  for (auto& [key, idx] : pair_index) idx = next++;
  std::vector<std::int32_t> pair_of_row(n);
  for (std::size_t r = 0; r < n; ++r) {
    pair_of_row[r] =
        pair_index.at({design.prod_of_row[r], design.ret_of_row[r]});
  }

  CgmResult out;
  out.v_prod =
      one_way_cluster_vcov(design, design.prod_of_row, design.n_products);
  out.v_ret =
      one_way_cluster_vcov(design, design.ret_of_row, design.n_retailers);
  out.v_pair = one_way_cluster_vcov(design, pair_of_row, next);
  // Associated so that an intersection term equal to one of the one-way
  // terms cancels exactly.
  out.vcov_raw = out.v_prod + (out.v_ret - out.v_pair);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.vcov_raw);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition of the covariance failed");
  }
  if (es.eigenvalues().minCoeff() < 0.0) {
    out.psd_repaired = true;
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    out.vcov = es.eigenvectors() * clipped.asDiagonal() *
               es.eigenvectors().transpose();
    out.vcov = 0.5 * (out.vcov + out.vcov.transpose()).eval();
  } else {
    out.vcov = out.vcov_raw;
  }
  return out;
}

FitStats fit_statistics(const Eigen::VectorXd& y_original,
                        const Eigen::VectorXd& y_demeaned,
                        const Eigen::VectorXd& residuals, int k_total,
                        bool rmse_df_adjust) {
  FitStats stats;
  const Eigen::Index n = y_original.size();
  const double rss = residuals.squaredNorm();
  const double rmse_den =
      rmse_df_adjust ? std::max<Eigen::Index>(n - k_total, 1) : n;
  stats.rmse = std::sqrt(rss / static_cast<double>(rmse_den));
  if (n > 1 && n > k_total) {
    const double tss =
        (y_original.array() - y_original.mean()).square().sum();
    if (tss > 0.0) {
      stats.adj_r2 = 1.0 - (rss / static_cast<double>(n - k_total)) /
                               (tss / static_cast<double>(n - 1));
    }
  }
  const double tss_within = y_demeaned.squaredNorm();
  if (tss_within > 0.0) {
    stats.within_r2 = 1.0 - rss / tss_within;
  }
  return stats;
}

std::optional<std::size_t> EventStudyFit::bin_position(int bin) const {
  const auto it = std::lower_bound(bins.begin(), bins.end(), bin);
  if (it == bins.end() || *it != bin) return std::nullopt;
  return static_cast<std::size_t>(it - bins.begin());
}

EventStudyFitDetail fit_event_study_detailed(const RegressionSample& sample,
                                             const FitOptions& opts) {
  const std::size_t n = sample.rows.size();
  if (n == 0) throw std::invalid_argument("empty regression sample");
  std::size_t ref_count = 0;
  for (const auto& row : sample.rows) {
    if (!opts.window.contains(row.bin) || row.bin % 3 != 0) {
      throw std::invalid_argument("invalid bin: " + std::to_string(row.bin));
    }
    if (row.bin == opts.ref_bin) ++ref_count;
  }
  if (ref_count == 0) {
    throw std::invalid_argument("reference bin has no observations");
  }

  DemeanResult demeaned =
      within_transform(sample, opts.tol, opts.max_iter, opts.ref_bin);

  // Raw dummy counts per candidate bin, for the absorption test.
  std::map<int, double> bin_count;
  for (const auto& row : sample.rows) bin_count[row.bin] += 1.0;

  EventStudyFitDetail detail;
  EventStudyFit& fit = detail.fit;
  fit.ref_bin = opts.ref_bin;
  fit.ssc = opts.ssc;
  fit.n_obs = static_cast<std::int64_t>(n);
  fit.n_products = sample.n_products();
  fit.n_retailers = sample.n_retailers();
  fit.demean_iterations = demeaned.iterations;
  fit.demean_delta = demeaned.final_delta;

  // Grid: all 3-month bins spanned by the sample. Grid bins without any
  // observation are reported as dropped.
  const int lo = bin_count.begin()->first;
  const int hi = bin_count.rbegin()->first;
  for (int b = lo; b <= hi; b += 3) {
    if (b != opts.ref_bin && !bin_count.contains(b)) {
      fit.dropped_bins.push_back(b);
    }
  }

  // Greedy scan in ascending bin order with an incremental Cholesky factor:
  // a column is dropped when the fixed effects absorb it entirely or when it
  // is linearly dependent on the columns accepted before it.
  const Eigen::Index k_cand = static_cast<Eigen::Index>(demeaned.bins.size());
  std::vector<Eigen::Index> accepted;
  Eigen::MatrixXd lfac(k_cand, k_cand);  // lower-triangular, grows by row
  for (Eigen::Index c = 0; c < k_cand; ++c) {
    const double d = demeaned.x.col(c).squaredNorm();
    const double raw = bin_count.at(demeaned.bins[static_cast<std::size_t>(c)]);
    if (d < kAbsorbedTol * raw) {
      fit.dropped_bins.push_back(demeaned.bins[static_cast<std::size_t>(c)]);
      continue;
    }
    const Eigen::Index ka = static_cast<Eigen::Index>(accepted.size());
    Eigen::VectorXd w(ka);
    if (ka > 0) {
      Eigen::VectorXd cross(ka);
      for (Eigen::Index j = 0; j < ka; ++j) {
        cross(j) = demeaned.x.col(accepted[j]).dot(demeaned.x.col(c));
      }
      w = lfac.topLeftCorner(ka, ka)
              .triangularView<Eigen::Lower>()
              .solve(cross);
    }
    const double r2 = d - w.squaredNorm();
    if (r2 < kCollinearTol * d) {
      fit.dropped_bins.push_back(demeaned.bins[static_cast<std::size_t>(c)]);
      continue;
    }
    lfac.row(ka).head(ka) = w.transpose();
    lfac(ka, ka) = std::sqrt(r2);
    accepted.push_back(c);
  }
  std::sort(fit.dropped_bins.begin(), fit.dropped_bins.end());

  const Eigen::Index k = static_cast<Eigen::Index>(accepted.size());
  if (k == 0 && k_cand > 0) {
    throw std::runtime_error("design is rank deficient: no bin survives the fixed effects");
  }
  Eigen::MatrixXd x(demeaned.x.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    x.col(j) = demeaned.x.col(accepted[j]);
    fit.bins.push_back(demeaned.bins[static_cast<std::size_t>(accepted[j])]);
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd bread = Eigen::MatrixXd::Zero(k, k);
  if (k > 0) {
    const auto lview =
        lfac.topLeftCorner(k, k).triangularView<Eigen::Lower>();
    const Eigen::VectorXd xty = x.transpose() * demeaned.y;
    beta = lview.transpose().solve(lview.solve(xty));
    const Eigen::MatrixXd linv =
        lview.solve(Eigen::MatrixXd::Identity(k, k));
    bread = linv.transpose() * linv;
  }
  fit.beta.assign(beta.data(), beta.data() + beta.size());

  const Eigen::VectorXd residuals = demeaned.y - x * beta;

  fit.n_components = count_components(sample);
  fit.k_total = static_cast<int>(k) + fit.n_products + fit.n_retailers -
                fit.n_components;

  Eigen::VectorXd y_original(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    y_original(static_cast<Eigen::Index>(r)) = sample.rows[r].y;
  }
  const FitStats stats = fit_statistics(y_original, demeaned.y, residuals,
                                        fit.k_total, opts.rmse_df_adjust);
  fit.rmse = stats.rmse;
  fit.adj_r2 = stats.adj_r2;
  fit.within_r2 = stats.within_r2;
  fit.dof_inference = std::min(fit.n_products, fit.n_retailers) - 1;

  ClusteredDesign design;
  design.x = std::move(x);
  design.residuals = residuals;
  design.bread = std::move(bread);
  design.prod_of_row.reserve(n);
  design.ret_of_row.reserve(n);
  for (const auto& row : sample.rows) {
    design.prod_of_row.push_back(row.prod);
    design.ret_of_row.push_back(row.ret);
  }
  design.n_products = fit.n_products;
  design.n_retailers = fit.n_retailers;
  design.k_total = fit.k_total;
  design.ssc = opts.ssc;

  if (fit.n_products >= 2 && fit.n_retailers >= 2 && k > 0) {
    const CgmResult cgm = cgm_vcov(design);
    fit.vcov = cgm.vcov;
    fit.vcov_valid = true;
    fit.psd_repaired = cgm.psd_repaired;
  } else {
    fit.vcov = Eigen::MatrixXd::Zero(k, k);
    fit.vcov_valid = false;
  }

  detail.design = std::move(design);
  detail.y_original = std::move(y_original);
  detail.y_demeaned = std::move(demeaned.y);
  return detail;
}

EventStudyFit fit_event_study(const RegressionSample& sample,
                              const FitOptions& opts) {
  return fit_event_study_detailed(sample, opts).fit;
}

FixedEffectsSolution recover_fixed_effects(const RegressionSample& sample,
                                           const EventStudyFit& fit,
                                           double tol, int max_iter) {
  const int np = sample.n_products();
  const int nr = sample.n_retailers();
  std::map<int, double> beta_of_bin;
  for (std::size_t i = 0; i < fit.bins.size(); ++i) {
    beta_of_bin[fit.bins[i]] = fit.beta[i];
  }
  std::vector<double> partial(sample.rows.size());
  for (std::size_t r = 0; r < sample.rows.size(); ++r) {
    const auto it = beta_of_bin.find(sample.rows[r].bin);
    partial[r] = sample.rows[r].y - (it == beta_of_bin.end() ? 0.0 : it->second);
  }

  FixedEffectsSolution sol;
  sol.alpha.assign(np, 0.0);
  sol.delta.assign(nr, 0.0);
  std::vector<double> count_p(np, 0.0), count_r(nr, 0.0);
  for (const auto& row : sample.rows) {
    count_p[row.prod] += 1.0;
    count_r[row.ret] += 1.0;
  }
  double change = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    change = 0.0;
    std::vector<double> sum_p(np, 0.0);
    for (std::size_t r = 0; r < sample.rows.size(); ++r) {
      sum_p[sample.rows[r].prod] += partial[r] - sol.delta[sample.rows[r].ret];
    }
    for (int i = 0; i < np; ++i) {
      const double next = count_p[i] > 0 ? sum_p[i] / count_p[i] : 0.0;
      change = std::max(change, std::fabs(next - sol.alpha[i]));
      sol.alpha[i] = next;
    }
    std::vector<double> sum_r(nr, 0.0);
    for (std::size_t r = 0; r < sample.rows.size(); ++r) {
      sum_r[sample.rows[r].ret] += partial[r] - sol.alpha[sample.rows[r].prod];
    }
    for (int j = 0; j < nr; ++j) {
      const double next = count_r[j] > 0 ? sum_r[j] / count_r[j] : 0.0;
      change = std::max(change, std::fabs(next - sol.delta[j]));
      sol.delta[j] = next;
    }
    sol.iterations = iter + 1;
    if (change < tol) break;
  }
  sol.final_delta = change;
  // Normalization: retailer effects average to zero.
  double mean_delta = 0.0;
  for (const double d : sol.delta) mean_delta += d;
  mean_delta /= nr > 0 ? nr : 1;
  for (double& d : sol.delta) d -= mean_delta;
  for (double& a : sol.alpha) a += mean_delta;
  return sol;
}

}  // namespace pricepanel
