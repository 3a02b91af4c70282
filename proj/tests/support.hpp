#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "lgdp/draw_store.hpp"
#include "lgdp/panel.hpp"

namespace lgdp::test {

inline ItemSpec spec(int id, Dimension d, double anchor = 0.0) {
  ItemSpec s;
  s.item_id = id;
  s.name = "item " + std::to_string(id);
  s.dimension = d;
  s.intercept_anchor = anchor;
  return s;
}

/// Items 1..n_gdp GDP, then POP, then GDPPC, anchors 0.
inline std::vector<ItemSpec> specs(int n_gdp, int n_pop, int n_gdppc) {
  std::vector<ItemSpec> out;
  int id = 1;
  for (int i = 0; i < n_gdp; ++i) out.push_back(spec(id++, Dimension::Gdp));
  for (int i = 0; i < n_pop; ++i) out.push_back(spec(id++, Dimension::Pop));
  for (int i = 0; i < n_gdppc; ++i) out.push_back(spec(id++, Dimension::Gdppc));
  return out;
}

/// Removes the directory on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    static std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("lgdp-" + name + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Every draw of one element, chain-major.
inline std::vector<double> pooled(const DrawStore& store, const std::string& param,
                                  std::size_t element) {
  std::vector<double> out;
  for (int c = 0; c < store.num_chains(); ++c) {
    const auto v = store.read(param, c, element, 1);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

}  // namespace lgdp::test
