#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace pricepanel {

// Reproducibility record for a run: what was invoked, on which bytes, and
// which bytes came out. Output digests are the determinism contract;
// timestamps are informational.
struct RunManifest {
  std::string command;
  std::string config_sha256;
  std::string version;
  std::string started_utc;
  std::string finished_utc;
  std::map<std::string, std::string> input_digests;   // path -> sha256
  std::map<std::string, std::string> output_digests;  // path -> sha256

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  std::string to_json() const;
};

std::string utc_now_iso8601();

}  // namespace pricepanel
