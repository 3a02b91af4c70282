#include "lgdp/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "lgdp/error.hpp"

namespace lgdp {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(std::string_view s, std::string_view what) {
  const auto t = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw InputError(fmt::format("{}: cannot parse '{}' as a number", what, t));
  return v;
}

long long parse_int(std::string_view s, std::string_view what) {
  const auto t = trim(s);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw InputError(fmt::format("{}: cannot parse '{}' as an integer", what, t));
  return v;
}

Config Config::parse(std::string_view text, std::string_view origin) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw InputError(fmt::format("{}:{}: expected key = value", origin, line_no));
    auto key = trim(std::string_view(stripped).substr(0, eq));
    if (key.empty()) throw InputError(fmt::format("{}:{}: empty key", origin, line_no));
    cfg.entries_[std::move(key)] = trim(std::string_view(stripped).substr(eq + 1));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open config file {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  Config cfg = parse(buf.str(), path.string());
  cfg.base_dir_ = path.parent_path();
  return cfg;
}

bool Config::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

std::optional<std::string> Config::get(std::string_view key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(std::string_view key, std::string_view fallback) const {
  auto v = get(key);
  return v ? *v : std::string(fallback);
}

double Config::get_double(std::string_view key, double fallback) const {
  auto v = get(key);
  return v ? parse_double(*v, key) : fallback;
}

long long Config::get_int(std::string_view key, long long fallback) const {
  auto v = get(key);
  return v ? parse_int(*v, key) : fallback;
}

bool Config::get_bool(std::string_view key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw InputError(fmt::format("{}: expected true/false, got '{}'", key, *v));
}

std::optional<std::vector<double>> Config::get_doubles(std::string_view key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  std::vector<double> out;
  if (trim(*v).empty()) return out;
  for (const auto& part : split(*v, ',')) out.push_back(parse_double(part, key));
  return out;
}

std::vector<std::string> Config::get_list(std::string_view key) const {
  std::vector<std::string> out;
  auto v = get(key);
  if (!v || trim(*v).empty()) return out;
  for (const auto& part : split(*v, ',')) out.push_back(trim(part));
  return out;
}

std::vector<std::string> Config::keys_with_prefix(std::string_view prefix) const {
  std::vector<std::string> out;
  for (auto it = entries_.lower_bound(prefix); it != entries_.end(); ++it) {
    if (it->first.compare(0, prefix.size(), prefix) != 0) break;
    out.push_back(it->first);
  }
  return out;
}

std::filesystem::path Config::resolve(const std::filesystem::path& p) const {
  if (p.is_absolute() || base_dir_.empty()) return p;
  return base_dir_ / p;
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
  return out;
}

}  // namespace lgdp
