#include "lgdp/run_manifest.hpp"

#include <chrono>
#include <fstream>
#include <iterator>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "lgdp/error.hpp"

namespace lgdp {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw InternalError("SHA-256 computation failed");
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot read {}", path.string()));
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(data);
}

std::string utc_timestamp() {
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out << "tool lgdp " << kToolVersion << '\n';
  out << "command " << command << '\n';
  out << "config " << config_hash << ' ' << config_path << '\n';
  for (const auto& [p, h] : inputs) out << "input " << h << ' ' << p << '\n';
  out << "seed " << seed << '\n';
  out << "started " << started << '\n';
  out << "finished " << finished << '\n';
  for (const auto& [role, p] : outputs) out << "output " << role << ' ' << p << '\n';
  if (!out) throw InputError(fmt::format("write failed for {}", path.string()));
}

}  // namespace lgdp
