#include "lgdp/draw_store.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <sstream>

#include <fmt/format.h>

#include "lgdp/config.hpp"
#include "lgdp/error.hpp"

namespace lgdp {

namespace {
constexpr std::string_view kMagic = "lgdp-drawstore 1";
}

void encode_le(std::span<const double> values, std::vector<char>& out) {
  out.resize(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) out[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
}

void decode_le(std::span<const char> bytes, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b])) << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
}

StoreLayout StoreLayout::from_panel(const Panel& panel) {
  StoreLayout l;
  for (std::size_t c = 0; c < panel.num_countries(); ++c)
    l.countries.push_back({panel.countries()[c], panel.first_year(c), panel.num_years(c)});
  for (const auto& item : panel.items()) l.items.push_back({item.item_id, item.dimension, item.name});
  return l;
}

std::size_t StoreLayout::num_cells() const {
  std::size_t n = 0;
  for (const auto& c : countries) n += c.num_years;
  return n;
}

std::filesystem::path DrawStore::chain_file(const std::filesystem::path& dir, int chain,
                                            std::string_view param) {
  return dir / fmt::format("chain_{}", chain) / fmt::format("{}.f64", param);
}

void write_manifest(const std::filesystem::path& dir, const StoreLayout& layout,
                    const std::vector<ParamInfo>& params, int num_chains,
                    long long draws_per_chain, const std::map<std::string, std::string>& meta) {
  std::ofstream out(dir / "manifest.txt", std::ios::binary);
  if (!out) throw StoreError(fmt::format("cannot write manifest in {}", dir.string()));
  out << kMagic << '\n';
  out << "chains " << num_chains << '\n';
  out << "draws_per_chain " << draws_per_chain << '\n';
  for (const auto& [k, v] : meta) out << "meta " << k << ' ' << v << '\n';
  for (const auto& c : layout.countries)
    out << "country " << c.first_year << ' ' << c.num_years << ' ' << c.id << '\n';
  for (const auto& i : layout.items)
    out << "item " << i.item_id << ' ' << to_string(i.dimension) << ' ' << i.name << '\n';
  for (const auto& p : params) out << "param " << p.name << ' ' << p.size << '\n';
  if (!out) throw StoreError(fmt::format("manifest write failed in {}", dir.string()));
}

DrawStore DrawStore::open(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.txt";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError(fmt::format("draw store {} has no manifest", dir.string()));
  DrawStore s;
  s.dir_ = dir;
  std::string line;
  if (!std::getline(in, line) || line != kMagic)
    throw StoreError(fmt::format("{} is not a draw store manifest", path.string()));
  int line_no = 1;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string tag;
      ls >> tag;
      if (tag == "chains") {
        ls >> s.num_chains_;
      } else if (tag == "draws_per_chain") {
        ls >> s.draws_per_chain_;
      } else if (tag == "meta") {
        std::string k;
        ls >> k;
        std::string v;
        std::getline(ls, v);
        s.meta_[k] = trim(v);
      } else if (tag == "country") {
        StoreLayout::Country c;
        ls >> c.first_year >> c.num_years;
        std::getline(ls, c.id);
        c.id = trim(c.id);
        s.layout_.countries.push_back(c);
      } else if (tag == "item") {
        StoreLayout::Item i;
        std::string dim;
        ls >> i.item_id >> dim;
        i.dimension = parse_dimension(dim);
        std::getline(ls, i.name);
        i.name = trim(i.name);
        s.layout_.items.push_back(i);
      } else if (tag == "param") {
        ParamInfo p;
        ls >> p.name >> p.size;
        s.params_.push_back(p);
      } else {
        throw StoreError(fmt::format("unknown manifest entry '{}'", tag));
      }
      if (ls.fail()) throw StoreError("malformed manifest line");
    }
  } catch (const InputError& e) {
    throw StoreError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
  } catch (const StoreError& e) {
    throw StoreError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
  }
  if (s.num_chains_ < 1 || s.draws_per_chain_ < 1)
    throw StoreError(fmt::format("{}: store holds no draws", path.string()));
  for (int c = 0; c < s.num_chains_; ++c) {
    for (const auto& p : s.params_) {
      const auto f = chain_file(dir, c, p.name);
      std::error_code ec;
      const auto size = std::filesystem::file_size(f, ec);
      const auto expected = static_cast<std::uintmax_t>(s.draws_per_chain_) * p.size * 8;
      if (ec || size != expected)
        throw StoreError(fmt::format("{} is missing or has the wrong size", f.string()));
    }
  }
  return s;
}

bool DrawStore::has_param(std::string_view name) const {
  return std::any_of(params_.begin(), params_.end(), [&](const ParamInfo& p) { return p.name == name; });
}

const ParamInfo& DrawStore::param(std::string_view name) const {
  for (const auto& p : params_)
    if (p.name == name) return p;
  throw StoreError(fmt::format("draw store has no parameter '{}'", name));
}

std::vector<double> DrawStore::read(std::string_view name, int chain, std::size_t first,
                                    std::size_t count) const {
  const auto& p = param(name);
  if (first + count > p.size) throw StoreError(fmt::format("read past the end of '{}'", name));
  std::ifstream in(chain_file(dir_, chain, name), std::ios::binary);
  if (!in) throw StoreError(fmt::format("cannot open draws for '{}' chain {}", name, chain));
  const auto draws = static_cast<std::size_t>(draws_per_chain_);
  std::vector<double> out(draws * count);
  std::vector<char> buf(count * 8);
  if (first == 0 && count == p.size) {
    buf.resize(draws * count * 8);
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!in) throw StoreError(fmt::format("short read on '{}' chain {}", name, chain));
    decode_le(buf, out);
    return out;
  }
  for (std::size_t d = 0; d < draws; ++d) {
    in.seekg(static_cast<std::streamoff>((d * p.size + first) * 8));
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!in) throw StoreError(fmt::format("short read on '{}' chain {}", name, chain));
    decode_le(buf, std::span<double>(out).subspan(d * count, count));
  }
  return out;
}

ChainWriter::ChainWriter(const std::filesystem::path& dir, int chain, std::vector<ParamInfo> params)
    : params_(std::move(params)) {
  const auto chain_dir = dir / fmt::format("chain_{}", chain);
  std::error_code ec;
  std::filesystem::create_directories(chain_dir, ec);
  if (ec) throw StoreError(fmt::format("cannot create {}: {}", chain_dir.string(), ec.message()));
  for (const auto& p : params_) {
    auto f = std::make_unique<std::ofstream>(DrawStore::chain_file(dir, chain, p.name),
                                             std::ios::binary | std::ios::trunc);
    if (!*f) throw StoreError(fmt::format("cannot create draw file for '{}'", p.name));
    files_.push_back(std::move(f));
  }
}

void ChainWriter::write(std::size_t p, std::span<const double> values) {
  if (values.size() != params_[p].size)
    throw InternalError(fmt::format("'{}' expects {} values, got {}", params_[p].name,
                                    params_[p].size, values.size()));
  encode_le(values, buffer_);
  files_[p]->write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  if (!*files_[p]) throw StoreError(fmt::format("write failed for '{}'", params_[p].name));
}

void ChainWriter::close() {
  for (std::size_t p = 0; p < files_.size(); ++p) {
    files_[p]->close();
    if (!*files_[p]) throw StoreError(fmt::format("close failed for '{}'", params_[p].name));
  }
}

}  // namespace lgdp
