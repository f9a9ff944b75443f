#include "pricepanel/manifest.hpp"

#include <ctime>

#include <json.hpp>

#include "pricepanel/digest.hpp"

namespace pricepanel {

void RunManifest::add_input(const std::filesystem::path& path) {
  input_digests[path.string()] = sha256_file_hex(path);
}

void RunManifest::add_output(const std::filesystem::path& path) {
  output_digests[path.string()] = sha256_file_hex(path);
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config_sha256"] = config_sha256;
  j["version"] = version;
  j["started_utc"] = started_utc;
  j["finished_utc"] = finished_utc;
  j["inputs"] = input_digests;
  j["outputs"] = output_digests;
  return j.dump(2) + "\n";
}

std::string utc_now_iso8601() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace pricepanel
