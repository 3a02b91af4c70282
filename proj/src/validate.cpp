#include "lgdp/validate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "lgdp/error.hpp"

namespace lgdp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (!std::isfinite(v)) return "NA";
  return fmt::format("{:.8g}", v);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  return out;
}

void require_layout(const Panel& panel, const PosteriorSummary& summary) {
  if (!(summary.layout == StoreLayout::from_panel(panel)))
    throw StoreError("summary was produced on a different panel layout");
}

ProfileRow profile(std::string group, int bucket, std::vector<double> values) {
  ProfileRow r;
  r.group = std::move(group);
  r.bucket = bucket;
  r.n = values.size();
  if (values.empty()) {
    r.q25 = r.median = r.q75 = r.min = r.max = r.mean = kNaN;
    return r;
  }
  std::sort(values.begin(), values.end());
  r.q25 = quantile_sorted(values, 0.25);
  r.median = quantile_sorted(values, 0.5);
  r.q75 = quantile_sorted(values, 0.75);
  r.min = values.front();
  r.max = values.back();
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return r;
}

ZGroup zgroup(std::string key, const std::vector<double>& z) {
  ZGroup g;
  g.key = std::move(key);
  g.n = z.size();
  if (z.empty()) {
    g.mean = g.sd = kNaN;
    return g;
  }
  g.mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
  double ss = 0.0;
  for (double v : z) ss += (v - g.mean) * (v - g.mean);
  g.sd = z.size() > 1 ? std::sqrt(ss / static_cast<double>(z.size() - 1)) : 0.0;
  return g;
}

}  // namespace

ZScoreTable zscores(const Panel& panel, const PosteriorSummary& summary) {
  require_layout(panel, summary);
  const auto& ypred = summary.at("ypred");
  const std::size_t nj = panel.num_items();
  ZScoreTable table;
  for (std::size_t c = 0; c < panel.num_countries(); ++c) {
    for (std::size_t t = 0; t < panel.num_years(c); ++t) {
      const auto cell = panel.cell(c, t);
      int count = 0;
      std::array<int, kNumDimensions> per_dim{};
      for (std::size_t j = 0; j < nj; ++j) {
        if (!panel.observed(cell, j)) continue;
        ++count;
        ++per_dim[static_cast<int>(panel.item(j).dimension)];
      }
      for (std::size_t j = 0; j < nj; ++j) {
        if (!panel.observed(cell, j)) continue;
        const auto& s = ypred[cell * nj + j];
        ZScoreRow row;
        row.country = panel.countries()[c];
        row.year = panel.first_year(c) + static_cast<int>(t);
        row.item_id = panel.item(j).item_id;
        row.item_name = panel.item(j).name;
        row.dimension = panel.item(j).dimension;
        row.cell = cell;
        row.item = j;
        row.item_count = count;
        row.co_observed = per_dim[static_cast<int>(row.dimension)] - 1;
        row.observed = panel.value(cell, j);
        row.mean = s.mean;
        row.sd = s.sd;
        row.flagged = !s.defined() || !(s.sd > 0.0);
        row.z = row.flagged ? kNaN : (row.observed - row.mean) / row.sd;
        table.rows.push_back(std::move(row));
      }
    }
  }
  return table;
}

std::vector<ZGroup> zscores_by_item(const ZScoreTable& table) {
  std::map<int, std::vector<double>> groups;
  for (const auto& r : table.rows)
    if (!r.flagged) groups[r.item_id].push_back(r.z);
  std::vector<ZGroup> out;
  for (const auto& [id, z] : groups) out.push_back(zgroup(std::to_string(id), z));
  return out;
}

std::vector<ZGroup> zscores_by_item_count(const ZScoreTable& table) {
  std::map<int, std::vector<double>> groups;
  for (const auto& r : table.rows)
    if (!r.flagged) groups[r.item_count].push_back(r.z);
  std::vector<ZGroup> out;
  for (const auto& [count, z] : groups) out.push_back(zgroup(std::to_string(count), z));
  return out;
}

CoverageTable coverage(const ZScoreTable& table) {
  struct Tally {
    std::string name;
    std::size_t n = 0, w1 = 0, w2 = 0, w3 = 0;
  };
  std::map<int, Tally> per_item;
  Tally total;
  for (const auto& r : table.rows) {
    if (r.flagged) continue;
    auto& t = per_item[r.item_id];
    t.name = r.item_name;
    const double a = std::abs(r.z);
    for (auto* tally : {&t, &total}) {
      ++tally->n;
      tally->w1 += a <= 1.0;
      tally->w2 += a <= 2.0;
      tally->w3 += a <= 3.0;
    }
  }
  if (total.n == 0) throw InputError("coverage needs at least one usable z-score");
  auto row = [](int id, const Tally& t) {
    const double n = static_cast<double>(t.n);
    return CoverageRow{id, t.name, t.n, t.w1 / n, t.w2 / n, t.w3 / n};
  };
  CoverageTable out;
  for (const auto& [id, t] : per_item) out.items.push_back(row(id, t));
  out.weighted = row(0, total);
  out.weighted.name = "weighted";
  return out;
}

std::vector<std::vector<double>> rmse_draws(const DrawStore& store, const Panel& panel,
                                            std::span<const int> item_ids) {
  const auto& layout = store.layout();
  struct Span {
    int first_year;
    std::size_t num_years;
    std::size_t offset;
  };
  std::map<std::string, Span, std::less<>> country_pos;
  std::size_t offset = 0;
  for (const auto& c : layout.countries) {
    country_pos[c.id] = {c.first_year, c.num_years, offset};
    offset += c.num_years;
  }
  std::map<int, std::size_t> store_item;
  for (std::size_t j = 0; j < layout.items.size(); ++j) store_item[layout.items[j].item_id] = j;
  const std::size_t store_nj = layout.items.size();

  // slot in the store -> (target index, observed value)
  std::vector<std::pair<std::size_t, std::pair<std::size_t, double>>> targets;
  std::vector<std::string> missing;
  for (std::size_t k = 0; k < item_ids.size(); ++k) {
    const int pj = panel.item_index(item_ids[k]);
    if (pj < 0) throw InputError(fmt::format("item {} is not in the panel", item_ids[k]));
    const auto sj = store_item.find(item_ids[k]);
    for (std::size_t c = 0; c < panel.num_countries(); ++c) {
      for (std::size_t t = 0; t < panel.num_years(c); ++t) {
        const auto cell = panel.cell(c, t);
        if (!panel.observed(cell, pj)) continue;
        const int year = panel.first_year(c) + static_cast<int>(t);
        const auto cp = country_pos.find(panel.countries()[c]);
        const bool ok = sj != store_item.end() && cp != country_pos.end() &&
                        year >= cp->second.first_year &&
                        static_cast<std::size_t>(year - cp->second.first_year) < cp->second.num_years;
        if (!ok) {
          if (missing.size() < 20)
            missing.push_back(fmt::format("({}, {}, {})", panel.countries()[c], year, item_ids[k]));
          else if (missing.size() == 20)
            missing.push_back("...");
          continue;
        }
        const std::size_t store_cell =
            cp->second.offset + static_cast<std::size_t>(year - cp->second.first_year);
        targets.push_back({store_cell * store_nj + sj->second, {k, panel.value(cell, pj)}});
      }
    }
  }
  if (!missing.empty())
    throw StoreError(fmt::format("draw store {} does not cover target cells: {}",
                                 store.dir().string(), fmt::join(missing, ", ")));
  std::sort(targets.begin(), targets.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  const auto per_chain = static_cast<std::size_t>(store.draws_per_chain());
  const auto total = static_cast<std::size_t>(store.total_draws());
  std::vector<std::vector<double>> sse(item_ids.size(), std::vector<double>(total, 0.0));
  std::vector<std::vector<std::size_t>> count(item_ids.size(), std::vector<std::size_t>(total, 0));
  const std::size_t size = store.param("ypred").size;
  const std::size_t step =
      std::clamp<std::size_t>((std::size_t{4} << 20) / std::max<std::size_t>(per_chain, 1), 1, size);
  std::size_t next = 0;  // first target not yet processed
  for (std::size_t first = 0; first < size && next < targets.size(); first += step) {
    const std::size_t n = std::min(step, size - first);
    std::size_t end = next;
    while (end < targets.size() && targets[end].first < first + n) ++end;
    if (end == next) continue;
    for (int chain = 0; chain < store.num_chains(); ++chain) {
      const auto block = store.read("ypred", chain, first, n);
      for (std::size_t d = 0; d < per_chain; ++d) {
        const std::size_t draw = chain * per_chain + d;
        for (std::size_t i = next; i < end; ++i) {
          const double pred = block[d * n + (targets[i].first - first)];
          if (!std::isfinite(pred)) continue;
          const auto [k, y] = targets[i].second;
          sse[k][draw] += (y - pred) * (y - pred);
          ++count[k][draw];
        }
      }
    }
    next = end;
  }
  for (std::size_t k = 0; k < item_ids.size(); ++k)
    for (std::size_t d = 0; d < total; ++d)
      sse[k][d] = count[k][d] ? std::sqrt(sse[k][d] / static_cast<double>(count[k][d])) : kNaN;
  return sse;
}

std::vector<RmseRow> rmse_compare(const DrawStore& primary, const DrawStore& secondary,
                                  const Panel& panel, std::span<const int> target_items) {
  std::vector<int> ids(target_items.begin(), target_items.end());
  if (ids.empty())
    for (const auto& item : panel.items()) ids.push_back(item.item_id);
  const auto a = rmse_draws(primary, panel, ids);
  const auto b = rmse_draws(secondary, panel, ids);
  const std::size_t pairs = std::min(a.empty() ? 0 : a[0].size(), b.empty() ? 0 : b[0].size());
  std::vector<RmseRow> rows;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const auto& item = panel.item(static_cast<std::size_t>(panel.item_index(ids[k])));
    std::size_t cells = 0;
    const int pj = panel.item_index(ids[k]);
    for (std::size_t cell = 0; cell < panel.num_cells(); ++cell) cells += panel.observed(cell, pj);
    if (cells == 0) continue;
    std::vector<double> diff;
    diff.reserve(pairs);
    for (std::size_t d = 0; d < pairs; ++d) {
      const double v = a[k][d] - b[k][d];
      if (std::isfinite(v)) diff.push_back(v);
    }
    if (diff.empty()) continue;
    RmseRow row;
    row.item_id = ids[k];
    row.name = item.name;
    row.cells = cells;
    row.draws = diff.size();
    row.diff = std::accumulate(diff.begin(), diff.end(), 0.0) / static_cast<double>(diff.size());
    double below = 0.0;
    for (double v : diff) below += v < 0.0 ? 1.0 : (v == 0.0 ? 0.5 : 0.0);
    row.prob_primary_better = below / static_cast<double>(diff.size());
    std::sort(diff.begin(), diff.end());
    row.lower = quantile_sorted(diff, 0.025);
    row.upper = quantile_sorted(diff, 0.975);
    rows.push_back(std::move(row));
  }
  return rows;
}

CorrelationMatrix correlation_matrix(const Panel& panel, const PosteriorSummary& summary) {
  require_layout(panel, summary);
  const std::size_t nc = panel.num_cells();
  const std::size_t nj = panel.num_items();
  std::vector<std::vector<double>> series;  // NaN = unavailable
  CorrelationMatrix m;
  for (std::size_t j = 0; j < nj; ++j) {
    std::vector<double> v(nc, kNaN);
    for (std::size_t cell = 0; cell < nc; ++cell)
      if (panel.observed(cell, j)) v[cell] = panel.value(cell, j);
    m.variables.push_back(fmt::format("y.{}", panel.item(j).item_id));
    series.push_back(std::move(v));
  }
  const auto& ypred = summary.at("ypred");
  for (std::size_t j = 0; j < nj; ++j) {
    std::vector<double> v(nc, kNaN);
    for (std::size_t cell = 0; cell < nc; ++cell)
      if (ypred[cell * nj + j].defined()) v[cell] = ypred[cell * nj + j].mean;
    m.variables.push_back(fmt::format("yhat.{}", panel.item(j).item_id));
    series.push_back(std::move(v));
  }
  for (const char* name : {"gdp", "pop", "gdppc"}) {
    const auto& latent = summary.at(fmt::format("theta_{}", name));
    std::vector<double> v(nc, kNaN);
    for (std::size_t cell = 0; cell < nc; ++cell)
      if (latent[cell].defined()) v[cell] = latent[cell].mean;
    m.variables.push_back(fmt::format("theta.{}", name));
    series.push_back(std::move(v));
  }

  const std::size_t nv = series.size();
  m.r.assign(nv * nv, std::nullopt);
  m.overlap.assign(nv * nv, 0);
  for (std::size_t a = 0; a < nv; ++a) {
    for (std::size_t b = a; b < nv; ++b) {
      double sa = 0, sb = 0;
      std::size_t n = 0;
      for (std::size_t cell = 0; cell < nc; ++cell) {
        if (std::isnan(series[a][cell]) || std::isnan(series[b][cell])) continue;
        sa += series[a][cell];
        sb += series[b][cell];
        ++n;
      }
      m.overlap[a * nv + b] = m.overlap[b * nv + a] = n;
      if (n < 2) continue;
      const double ma = sa / static_cast<double>(n), mb = sb / static_cast<double>(n);
      double sab = 0, saa = 0, sbb = 0;
      for (std::size_t cell = 0; cell < nc; ++cell) {
        if (std::isnan(series[a][cell]) || std::isnan(series[b][cell])) continue;
        const double da = series[a][cell] - ma, db = series[b][cell] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
      }
      if (!(saa > 0.0) || !(sbb > 0.0)) continue;
      const double r = a == b ? 1.0 : std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
      m.r[a * nv + b] = m.r[b * nv + a] = r;
    }
  }
  return m;
}

std::vector<ProfileRow> uncertainty_profile(const Panel& panel, const PosteriorSummary& summary) {
  require_layout(panel, summary);
  const auto counts = item_counts(panel);
  std::vector<ProfileRow> rows;
  for (const char* name : {"gdp", "pop", "gdppc"}) {
    const auto& latent = summary.at(fmt::format("theta_{}", name));
    std::map<int, std::vector<double>> buckets;
    for (std::size_t cell = 0; cell < panel.num_cells(); ++cell)
      if (latent[cell].defined()) buckets[counts[cell]].push_back(latent[cell].sd);
    for (auto& [count, sds] : buckets) rows.push_back(profile(name, count, std::move(sds)));
  }
  return rows;
}

std::vector<ProfileRow> item_bias_profile(const ZScoreTable& table, const Panel& panel) {
  std::map<int, std::map<int, std::vector<double>>> groups;
  for (const auto& r : table.rows) {
    if (r.flagged) continue;
    groups[r.item_id][std::min(r.co_observed, kMaxCoObserved)].push_back(r.z);
  }
  std::vector<ProfileRow> rows;
  for (const auto& item : panel.items()) {
    const auto it = groups.find(item.item_id);
    if (it == groups.end()) continue;
    for (auto& [bucket, z] : it->second)
      rows.push_back(profile(std::to_string(item.item_id), bucket, std::move(z)));
  }
  return rows;
}

void write_zscores(const std::filesystem::path& path, const ZScoreTable& table) {
  auto out = open_out(path);
  out << "country,year,item_id,name,dimension,item_count,co_observed,observed,mean,sd,z,flagged\n";
  for (const auto& r : table.rows)
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.country, r.year, r.item_id,
                       r.item_name, to_string(r.dimension), r.item_count, r.co_observed,
                       num(r.observed), num(r.mean), num(r.sd), num(r.z), r.flagged ? 1 : 0);
}

void write_zgroups(const std::filesystem::path& path, std::string_view key_name,
                   std::span<const ZGroup> groups) {
  auto out = open_out(path);
  out << key_name << ",n,mean_z,sd_z\n";
  for (const auto& g : groups) out << fmt::format("{},{},{},{}\n", g.key, g.n, num(g.mean), num(g.sd));
}

void write_coverage(const std::filesystem::path& path, const CoverageTable& table) {
  auto out = open_out(path);
  out << "item_id,name,n,within_1sd,within_2sd,within_3sd\n";
  auto line = [&](const CoverageRow& r, std::string id) {
    out << fmt::format("{},{},{},{:.4f},{:.4f},{:.4f}\n", id, r.name, r.n, r.within1, r.within2,
                       r.within3);
  };
  for (const auto& r : table.items) line(r, std::to_string(r.item_id));
  line(table.weighted, "all");
}

void write_rmse(const std::filesystem::path& path, std::span<const RmseRow> rows) {
  auto out = open_out(path);
  out << "item_id,name,cells,draws,diff,lower95,upper95,pr_diff\n";
  for (const auto& r : rows)
    out << fmt::format("{},{},{},{},{:.6f},{:.6f},{:.6f},{:.4f}\n", r.item_id, r.name, r.cells,
                       r.draws, r.diff, r.lower, r.upper, r.prob_primary_better);
}

void write_correlation(const std::filesystem::path& matrix_path,
                       const std::filesystem::path& long_path, const CorrelationMatrix& m) {
  const std::size_t nv = m.variables.size();
  auto cell = [](const std::optional<double>& r) { return r ? fmt::format("{:.6f}", *r) : std::string("NA"); };
  {
    auto out = open_out(matrix_path);
    out << "variable";
    for (const auto& v : m.variables) out << ',' << v;
    out << '\n';
    for (std::size_t a = 0; a < nv; ++a) {
      out << m.variables[a];
      for (std::size_t b = 0; b < nv; ++b) out << ',' << cell(m.at(a, b));
      out << '\n';
    }
  }
  auto out = open_out(long_path);
  out << "var_a,var_b,overlap,r\n";
  for (std::size_t a = 0; a < nv; ++a)
    for (std::size_t b = 0; b < nv; ++b)
      out << fmt::format("{},{},{},{}\n", m.variables[a], m.variables[b], m.overlap[a * nv + b],
                         cell(m.at(a, b)));
}

void write_profile(const std::filesystem::path& path, std::string_view group_name,
                   std::string_view bucket_name, std::span<const ProfileRow> rows) {
  auto out = open_out(path);
  out << group_name << ',' << bucket_name << ",n,min,q25,median,q75,max,mean\n";
  for (const auto& r : rows)
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", r.group, r.bucket, r.n, num(r.min),
                       num(r.q25), num(r.median), num(r.q75), num(r.max), num(r.mean));
}

}  // namespace lgdp
