#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace lgdp {

inline constexpr std::string_view kToolVersion = "1.0.0";

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Provenance of one command invocation; written as `key value` lines.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::string config_hash;  // of the effective configuration text
  std::vector<std::pair<std::string, std::string>> inputs;  // path, hash
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::vector<std::pair<std::string, std::string>> outputs;  // role, relative path

  void write(const std::filesystem::path& path) const;
};

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace lgdp
