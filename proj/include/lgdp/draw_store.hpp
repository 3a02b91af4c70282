#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lgdp/panel.hpp"

namespace lgdp {

/// Panel coordinates a store was produced on.
struct StoreLayout {
  struct Country {
    std::string id;
    int first_year = 0;
    std::size_t num_years = 0;
    friend bool operator==(const Country&, const Country&) = default;
  };
  struct Item {
    int item_id = 0;
    Dimension dimension = Dimension::Gdp;
    std::string name;
    friend bool operator==(const Item&, const Item&) = default;
  };
  std::vector<Country> countries;
  std::vector<Item> items;

  static StoreLayout from_panel(const Panel& panel);
  std::size_t num_cells() const;
  friend bool operator==(const StoreLayout&, const StoreLayout&) = default;
};

struct ParamInfo {
  std::string name;
  std::size_t size = 0;
};

/// On-disk retained draws.
///
///   <dir>/manifest.txt          text: layout, parameter shapes, run metadata
///   <dir>/chain_<k>/<param>.f64 little-endian float64, draw-major
///                               (draw d, element e at offset (d * size + e) * 8)
///
/// Each chain's files depend only on that chain's seed path, so stores with
/// different chain counts share identical files for common chain indices.
class DrawStore {
 public:
  static DrawStore open(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }
  int num_chains() const { return num_chains_; }
  long long draws_per_chain() const { return draws_per_chain_; }
  long long total_draws() const { return draws_per_chain_ * num_chains_; }
  const StoreLayout& layout() const { return layout_; }
  const std::vector<ParamInfo>& params() const { return params_; }
  bool has_param(std::string_view name) const;
  const ParamInfo& param(std::string_view name) const;
  const std::map<std::string, std::string>& meta() const { return meta_; }

  /// Elements [first, first + count) of every draw of one chain, laid out
  /// [draw][count].
  std::vector<double> read(std::string_view param, int chain, std::size_t first,
                           std::size_t count) const;

  static std::filesystem::path chain_file(const std::filesystem::path& dir, int chain,
                                          std::string_view param);

 private:
  std::filesystem::path dir_;
  int num_chains_ = 0;
  long long draws_per_chain_ = 0;
  StoreLayout layout_;
  std::vector<ParamInfo> params_;
  std::map<std::string, std::string> meta_;
};

/// Appends one chain's draws.
class ChainWriter {
 public:
  ChainWriter(const std::filesystem::path& dir, int chain, std::vector<ParamInfo> params);
  /// Values for parameter index `p` of the current draw.
  void write(std::size_t p, std::span<const double> values);
  void close();

 private:
  std::vector<ParamInfo> params_;
  std::vector<std::unique_ptr<std::ofstream>> files_;
  std::vector<char> buffer_;
};

void write_manifest(const std::filesystem::path& dir, const StoreLayout& layout,
                    const std::vector<ParamInfo>& params, int num_chains,
                    long long draws_per_chain, const std::map<std::string, std::string>& meta);

void encode_le(std::span<const double> values, std::vector<char>& out);
void decode_le(std::span<const char> bytes, std::span<double> out);

}  // namespace lgdp
