#include "lgdp/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "lgdp/error.hpp"

namespace lgdp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Elements per block when streaming from the store: about 8M doubles.
std::size_t block_size(const DrawStore& store, std::size_t size) {
  const auto per_element = static_cast<std::size_t>(std::max<long long>(1, store.total_draws()));
  return std::clamp<std::size_t>((std::size_t{8} << 20) / per_element, 1, std::max<std::size_t>(size, 1));
}

// Reads a block of elements and regroups it element-major:
// out[e][chain * draws + d].
std::vector<std::vector<double>> read_block(const DrawStore& store, const std::string& name,
                                            std::size_t first, std::size_t count) {
  const auto draws = static_cast<std::size_t>(store.draws_per_chain());
  std::vector<std::vector<double>> out(count, std::vector<double>(draws * store.num_chains()));
  for (int c = 0; c < store.num_chains(); ++c) {
    const auto raw = store.read(name, c, first, count);
    for (std::size_t d = 0; d < draws; ++d)
      for (std::size_t e = 0; e < count; ++e) out[e][c * draws + d] = raw[d * count + e];
  }
  return out;
}

std::string fmt_num(double v) {
  if (std::isnan(v)) return "NA";
  return fmt::format("{:.8g}", v);
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) return kNaN;
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

ElementSummary summarize_values(std::span<const double> draws, int chains) {
  if (draws.empty()) throw InputError("cannot summarize an empty set of draws");
  if (chains < 1 || draws.size() % static_cast<std::size_t>(chains) != 0)
    throw InputError("draw count is not a multiple of the chain count");
  ElementSummary s;
  const std::size_t per_chain = draws.size() / static_cast<std::size_t>(chains);
  std::vector<double> finite;
  finite.reserve(draws.size());
  for (int c = 0; c < chains; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t d = 0; d < per_chain; ++d) {
      const double v = draws[c * per_chain + d];
      if (!std::isfinite(v)) continue;
      sum += v;
      ++n;
      finite.push_back(v);
    }
    s.chain_means.push_back(n ? sum / static_cast<double>(n) : kNaN);
  }
  s.n_draws = finite.size();
  if (finite.empty()) {
    s.mean = s.sd = kNaN;
    s.quantiles.fill(kNaN);
    return s;
  }
  const double n = static_cast<double>(finite.size());
  s.mean = std::accumulate(finite.begin(), finite.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : finite) ss += (v - s.mean) * (v - s.mean);
  s.sd = finite.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  std::sort(finite.begin(), finite.end());
  for (std::size_t k = 0; k < kQuantileProbs.size(); ++k)
    s.quantiles[k] = quantile_sorted(finite, kQuantileProbs[k]);
  return s;
}

const std::vector<ElementSummary>& PosteriorSummary::at(std::string_view name) const {
  auto it = params.find(std::string(name));
  if (it == params.end()) throw StoreError(fmt::format("summary has no parameter '{}'", name));
  return it->second;
}

PosteriorSummary summarize(const DrawStore& store) {
  PosteriorSummary out;
  out.layout = store.layout();
  out.chains = store.num_chains();
  out.draws_per_chain = store.draws_per_chain();
  if (store.total_draws() < 1) throw InputError("draw store is empty");
  for (const auto& p : store.params()) {
    auto& dest = out.params[p.name];
    dest.reserve(p.size);
    const auto step = block_size(store, p.size);
    for (std::size_t first = 0; first < p.size; first += step) {
      const auto count = std::min(step, p.size - first);
      for (const auto& values : read_block(store, p.name, first, count))
        dest.push_back(summarize_values(values, store.num_chains()));
    }
  }
  return out;
}

double potential_scale_reduction(std::span<const double> draws, int chains) {
  if (chains < 2) return kNaN;
  const std::size_t n = draws.size() / static_cast<std::size_t>(chains);
  if (n < 2) return kNaN;
  std::vector<double> means(chains), vars(chains);
  for (int c = 0; c < chains; ++c) {
    const auto chain = draws.subspan(c * n, n);
    const double m = std::accumulate(chain.begin(), chain.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : chain) ss += (v - m) * (v - m);
    means[c] = m;
    vars[c] = ss / static_cast<double>(n - 1);
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / chains;
  double between = 0.0;
  for (double m : means) between += (m - grand) * (m - grand);
  between *= static_cast<double>(n) / (chains - 1);
  const double within = std::accumulate(vars.begin(), vars.end(), 0.0) / chains;
  const double nn = static_cast<double>(n);
  const double var_plus = (nn - 1.0) / nn * within + between / nn;
  if (within <= 0.0) return between > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  return std::sqrt(var_plus / within);
}

double effective_sample_size(std::span<const double> draws, int chains) {
  const std::size_t n = draws.size() / static_cast<std::size_t>(chains);
  const double total = static_cast<double>(draws.size());
  if (n < 4) return total;
  const double nn = static_cast<double>(n);
  std::vector<double> means(chains), vars(chains);
  for (int c = 0; c < chains; ++c) {
    const auto chain = draws.subspan(c * n, n);
    means[c] = std::accumulate(chain.begin(), chain.end(), 0.0) / nn;
    double ss = 0.0;
    for (double v : chain) ss += (v - means[c]) * (v - means[c]);
    vars[c] = ss / (nn - 1.0);
  }
  const double within = std::accumulate(vars.begin(), vars.end(), 0.0) / chains;
  double var_plus = (nn - 1.0) / nn * within;
  if (chains > 1) {
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / chains;
    double b = 0.0;
    for (double m : means) b += (m - grand) * (m - grand);
    var_plus += b / (chains - 1);
  }
  if (!(var_plus > 0.0)) return total;

  // rho_t = 1 - (W - mean autocovariance_t) / var_plus
  auto rho = [&](std::size_t lag) {
    double acov = 0.0;
    for (int c = 0; c < chains; ++c) {
      const auto chain = draws.subspan(c * n, n);
      double s = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i) s += (chain[i] - means[c]) * (chain[i + lag] - means[c]);
      acov += s / nn;
    }
    acov /= chains;
    return 1.0 - (within - acov) / var_plus;
  };

  double tau = -1.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair < 0.0) break;
    tau += 2.0 * pair;
  }
  if (!(tau > 0.0)) return total;
  return std::min(total, total / tau);
}

ConvergenceReport diagnose(const DrawStore& store, bool include_predictive) {
  ConvergenceReport r;
  r.chains = store.num_chains();
  r.draws_per_chain = store.draws_per_chain();
  r.psr_available = r.chains >= 2 && r.draws_per_chain >= 2;
  r.max_psr = r.psr_available ? 0.0 : kNaN;
  r.min_ess = std::numeric_limits<double>::infinity();
  for (const auto& p : store.params()) {
    if (p.name == "ypred" && !include_predictive) continue;
    const auto step = block_size(store, p.size);
    for (std::size_t first = 0; first < p.size; first += step) {
      const auto count = std::min(step, p.size - first);
      const auto block = read_block(store, p.name, first, count);
      for (std::size_t e = 0; e < count; ++e) {
        const auto& values = block[e];
        if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); }))
          continue;  // undefined cells (e.g. growth at a country's first year)
        ParamDiagnostic d;
        d.param = p.name;
        d.element = first + e;
        d.psr = r.psr_available ? potential_scale_reduction(values, r.chains) : kNaN;
        d.ess = effective_sample_size(values, r.chains);
        const auto label = fmt::format("{}[{}]", p.name, d.element);
        if (r.psr_available && !(d.psr <= r.max_psr)) {
          r.max_psr = d.psr;
          r.max_psr_param = label;
        }
        if (d.ess < r.min_ess) {
          r.min_ess = d.ess;
          r.min_ess_param = label;
        }
        r.entries.push_back(std::move(d));
      }
    }
  }
  return r;
}

void write_convergence_report(const std::filesystem::path& path, const ConvergenceReport& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out << "chains = " << r.chains << '\n';
  out << "draws_per_chain = " << r.draws_per_chain << '\n';
  out << "psr_available = " << (r.psr_available ? "true" : "false") << '\n';
  out << "max_psr = " << fmt_num(r.max_psr) << '\n';
  out << "max_psr_param = " << r.max_psr_param << '\n';
  out << "min_ess = " << fmt_num(r.min_ess) << '\n';
  out << "min_ess_param = " << r.min_ess_param << '\n';
  out << "converged = " << (r.converged() ? "true" : "false") << '\n';
  for (const auto& e : r.entries) {
    out << fmt::format("{}[{}].psr = {}\n", e.param, e.element, fmt_num(e.psr));
    out << fmt::format("{}[{}].ess = {}\n", e.param, e.element, fmt_num(e.ess));
  }
}

void export_estimates(const PosteriorSummary& summary, const Panel& panel,
                      const std::filesystem::path& path) {
  if (!(summary.layout == StoreLayout::from_panel(panel)))
    throw StoreError("estimate export: summary and panel layouts differ");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out << kEstimateHeader << '\n';

  const auto& ypred = summary.at("ypred");
  std::vector<std::pair<std::string, const std::vector<ElementSummary>*>> latents{
      {"gdp", &summary.at("theta_gdp")},
      {"pop", &summary.at("theta_pop")},
      {"gdppc", &summary.at("theta_gdppc")},
  };
  for (const auto& [name, values] : summary.params)
    if (name.rfind("growth.", 0) == 0) latents.emplace_back(name, &values);

  const std::size_t nj = panel.num_items();
  auto stats = [](const ElementSummary& s) {
    return fmt::format("{},{},{},{},{},{},{}", fmt_num(s.mean), fmt_num(s.sd),
                       fmt_num(s.quantiles[0]), fmt_num(s.quantiles[1]), fmt_num(s.quantiles[2]),
                       fmt_num(s.quantiles[3]), fmt_num(s.quantiles[4]));
  };
  for (std::size_t c = 0; c < panel.num_countries(); ++c) {
    for (std::size_t t = 0; t < panel.num_years(c); ++t) {
      const auto cell = panel.cell(c, t);
      const int year = panel.first_year(c) + static_cast<int>(t);
      for (std::size_t j = 0; j < nj; ++j) {
        const auto& s = ypred[cell * nj + j];
        if (!s.defined()) continue;
        const auto& item = panel.item(j);
        const bool obs = panel.observed(cell, j);
        out << fmt::format("item,{},{},{},{},{},{},{},{}\n", panel.countries()[c], year,
                           item.item_id, item.name, to_string(item.dimension), obs ? 1 : 0,
                           obs ? fmt_num(panel.value(cell, j)) : "", stats(s));
      }
      for (const auto& [name, values] : latents) {
        const auto& s = (*values)[cell];
        if (!s.defined()) continue;
        out << fmt::format("latent,{},{},,{},{},0,,{}\n", panel.countries()[c], year, name,
                           name.rfind("growth.", 0) == 0 ? "growth" : name, stats(s));
      }
    }
  }
  if (!out) throw InputError(fmt::format("write failed for {}", path.string()));
}

}  // namespace lgdp
