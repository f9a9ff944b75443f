#include <json.hpp>

#include "pricepanel/csv.hpp"
#include "pricepanel/estimator.hpp"
#include "pricepanel/version.hpp"

namespace pricepanel {

namespace {

nlohmann::json optional_to_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

std::optional<double> optional_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

std::string fit_to_json(const EventStudyFit& fit) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["sample_label"] = fit.sample_label;
  j["outcome"] = fit.outcome;
  j["ref_bin"] = fit.ref_bin;
  j["bins"] = fit.bins;
  j["beta"] = fit.beta;
  j["dropped_bins"] = fit.dropped_bins;
  j["n_obs"] = fit.n_obs;
  j["n_products"] = fit.n_products;
  j["n_retailers"] = fit.n_retailers;
  j["rmse"] = fit.rmse;
  j["adj_r2"] = optional_to_json(fit.adj_r2);
  j["within_r2"] = optional_to_json(fit.within_r2);
  j["dof_inference"] = fit.dof_inference;
  j["k_total"] = fit.k_total;
  j["n_components"] = fit.n_components;
  j["ssc"] = ssc_name(fit.ssc);
  j["vcov_valid"] = fit.vcov_valid;
  j["psd_repaired"] = fit.psd_repaired;
  j["convergence"] = {{"iterations", fit.demean_iterations},
                      {"final_delta", fit.demean_delta}};
  std::vector<double> vcov_flat;
  if (fit.vcov_valid) {
    vcov_flat.reserve(static_cast<std::size_t>(fit.vcov.size()));
    for (Eigen::Index r = 0; r < fit.vcov.rows(); ++r) {
      for (Eigen::Index c = 0; c < fit.vcov.cols(); ++c) {
        vcov_flat.push_back(fit.vcov(r, c));
      }
    }
  }
  j["vcov"] = vcov_flat;  // row-major; empty when vcov_valid is false
  return j.dump(2) + "\n";
}

EventStudyFit fit_from_json_text(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  EventStudyFit fit;
  fit.sample_label = j.value("sample_label", std::string{});
  fit.outcome = j.value("outcome", std::string{});
  fit.ref_bin = j.at("ref_bin").get<int>();
  fit.bins = j.at("bins").get<std::vector<int>>();
  fit.beta = j.at("beta").get<std::vector<double>>();
  fit.dropped_bins = j.at("dropped_bins").get<std::vector<int>>();
  fit.n_obs = j.at("n_obs").get<std::int64_t>();
  fit.n_products = j.at("n_products").get<int>();
  fit.n_retailers = j.at("n_retailers").get<int>();
  fit.rmse = j.at("rmse").get<double>();
  fit.adj_r2 = optional_from_json(j.at("adj_r2"));
  fit.within_r2 = optional_from_json(j.at("within_r2"));
  fit.dof_inference = j.at("dof_inference").get<int>();
  fit.k_total = j.at("k_total").get<int>();
  fit.n_components = j.at("n_components").get<int>();
  if (const auto ssc = parse_ssc(j.value("ssc", "standard"))) fit.ssc = *ssc;
  fit.vcov_valid = j.at("vcov_valid").get<bool>();
  fit.psd_repaired = j.at("psd_repaired").get<bool>();
  fit.demean_iterations = j.at("convergence").at("iterations").get<int>();
  fit.demean_delta = j.at("convergence").at("final_delta").get<double>();
  const auto flat = j.at("vcov").get<std::vector<double>>();
  const Eigen::Index k = static_cast<Eigen::Index>(fit.bins.size());
  fit.vcov = Eigen::MatrixXd::Zero(k, k);
  if (fit.vcov_valid) {
    if (flat.size() != static_cast<std::size_t>(k * k)) {
      throw std::runtime_error("vcov size does not match bins");
    }
    for (Eigen::Index r = 0; r < k; ++r) {
      for (Eigen::Index c = 0; c < k; ++c) {
        fit.vcov(r, c) = flat[static_cast<std::size_t>(r * k + c)];
      }
    }
  }
  return fit;
}

EventStudyFit fit_from_json(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  std::string text;
  for (const auto& line : lines) {
    text += line;
    text += '\n';
  }
  return fit_from_json_text(text);
}

}  // namespace pricepanel
