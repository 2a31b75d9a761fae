#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "whyqa/dataset.hpp"
#include "whyqa/json_io.hpp"

namespace whyqa {

inline constexpr const char* kToolVersion = "0.3.0";

// Lowercase hex SHA-256 of a file's bytes. Throws IoError.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

// Reproducibility record written next to every output artifact. Everything
// except `timestamp` is a pure function of the invocation.
struct RunManifest {
  std::string subcommand;
  std::map<std::string, Json> flags;
  std::map<std::string, std::string> input_digests;   // path -> sha256
  std::map<std::string, std::string> output_digests;
  std::map<std::string, std::uint64_t> seeds;
  std::optional<ExperimentTag> experiment;
  std::string tool_version = kToolVersion;
  std::string timestamp;

  void add_input(const std::filesystem::path& p);
  void add_output(const std::filesystem::path& p);
};

Json manifest_to_json(const RunManifest& m);

// "<artifact>.manifest.json"
std::filesystem::path manifest_path_for(const std::filesystem::path& artifact);

}  // namespace whyqa
