#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lgdp {

/// Flat `key = value` configuration. `#` starts a comment; blank lines are
/// ignored; later assignments override earlier ones. Keys are
/// case-sensitive.
class Config {
 public:
  Config() = default;

  static Config parse(std::string_view text, std::string_view origin = "<string>");
  static Config load(const std::filesystem::path& path);

  void set(std::string key, std::string value) { entries_[std::move(key)] = std::move(value); }
  bool has(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;

  std::string get_string(std::string_view key, std::string_view fallback) const;
  double get_double(std::string_view key, double fallback) const;
  long long get_int(std::string_view key, long long fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  /// Comma separated list of doubles. Empty optional when the key is absent.
  std::optional<std::vector<double>> get_doubles(std::string_view key) const;
  /// Comma separated list of trimmed strings.
  std::vector<std::string> get_list(std::string_view key) const;

  /// Keys beginning with `prefix`, in sorted order.
  std::vector<std::string> keys_with_prefix(std::string_view prefix) const;

  /// Directory the config was loaded from; relative paths resolve against it.
  const std::filesystem::path& base_dir() const { return base_dir_; }
  std::filesystem::path resolve(const std::filesystem::path& p) const;

  /// Canonical text (sorted `key=value` lines), used for hashing.
  std::string canonical() const;

 private:
  std::map<std::string, std::string, std::less<>> entries_;
  std::filesystem::path base_dir_;
};

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

}  // namespace lgdp
