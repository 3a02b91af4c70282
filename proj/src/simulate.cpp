#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "lgdp/error.hpp"
#include "lgdp/ingest.hpp"
#include "lgdp/rng.hpp"

namespace lgdp {

std::vector<ItemSpec> GenerativeConfig::default_item_catalog_with_centers() {
  // Mean log value of each component series in the historical data.
  static constexpr double kCenters[] = {9.760, 9.947,  23.616, 11.068, 8.698, 8.872,
                                        8.455, 15.101, 2.541,  8.713,  7.762, 8.399,
                                        8.151, 8.446,  6.347,  6.991};
  auto items = default_item_catalog();
  for (std::size_t j = 0; j < items.size(); ++j) items[j].intercept_anchor = kCenters[j];
  return items;
}

void GenerativeConfig::validate() const {
  if (countries == 0 || years == 0) throw InputError("simulation needs at least one country-year");
  if (items.empty()) throw InputError("simulation needs at least one item");
  for (const auto& s : items)
    if (s.dimension == Dimension::Growth)
      throw InputError("simulation does not generate growth items");
  if (!(sigma_gdp > 0.0) || !(sigma_pop > 0.0))
    throw InputError("innovation variances must be positive");
  if (!(tau_gdp > 0.0) || !(tau_pop > 0.0) || !(tau_gdppc > 0.0))
    throw InputError("emission precisions must be positive");
  if (!(initial_variance > 0.0)) throw InputError("initial variance must be positive");
  if (jitter_intercepts && !(intercept_variance > 0.0))
    throw InputError("intercept variance must be positive");
  if (!(missing_rate >= 0.0 && missing_rate <= 1.0))
    throw InputError("missing rate must lie in [0, 1]");
}

GenerativeConfig GenerativeConfig::from_config(const Config& cfg) {
  GenerativeConfig g;
  const auto nonneg = [&](std::string_view key, long long fallback) {
    const auto v = cfg.get_int(key, fallback);
    if (v < 0) throw InputError(fmt::format("{} must be non-negative", key));
    return static_cast<std::size_t>(v);
  };
  g.countries = nonneg("sim.countries", static_cast<long long>(g.countries));
  g.years = nonneg("sim.years", static_cast<long long>(g.years));
  g.first_year = static_cast<int>(cfg.get_int("sim.first_year", g.first_year));
  g.sigma_gdp = cfg.get_double("sim.sigma_gdp", g.sigma_gdp);
  g.sigma_pop = cfg.get_double("sim.sigma_pop", g.sigma_pop);
  g.tau_gdp = cfg.get_double("sim.tau_gdp", g.tau_gdp);
  g.tau_pop = cfg.get_double("sim.tau_pop", g.tau_pop);
  g.tau_gdppc = cfg.get_double("sim.tau_gdppc", g.tau_gdppc);
  g.missing_rate = cfg.get_double("sim.missing_rate", g.missing_rate);
  g.initial_variance = cfg.get_double("prior.initial_variance", g.initial_variance);
  g.jitter_intercepts = cfg.get_bool("sim.jitter_intercepts", g.jitter_intercepts);
  g.intercept_variance = cfg.get_double("prior.intercept_variance", g.intercept_variance);
  if (auto centers = cfg.get_doubles("sim.alpha")) {
    if (centers->size() != g.items.size())
      throw InputError(fmt::format("sim.alpha lists {} values for {} items", centers->size(),
                                   g.items.size()));
    for (std::size_t j = 0; j < centers->size(); ++j) g.items[j].intercept_anchor = (*centers)[j];
  }
  g.validate();
  return g;
}

SimulatedPanel simulate_panel(const GenerativeConfig& config, std::uint64_t seed) {
  config.validate();
  Engine latent_rng = make_engine(seed, {1});
  Engine alpha_rng = make_engine(seed, {2});
  Engine noise_rng = make_engine(seed, {3});
  Engine mask_rng = make_engine(seed, {4});

  const std::size_t nc = config.countries;
  const std::size_t ny = config.years;
  const std::size_t nj = config.items.size();

  SimulatedPanel out;
  auto& truth = out.truth;
  truth.sigma_gdp = config.sigma_gdp;
  truth.sigma_pop = config.sigma_pop;
  truth.tau = {config.tau_gdp, config.tau_pop, config.tau_gdppc};
  truth.theta_gdp.resize(nc * ny);
  truth.theta_pop.resize(nc * ny);
  for (std::size_t c = 0; c < nc; ++c) {
    const double sd0 = std::sqrt(config.initial_variance);
    double g = sd0 * draw_normal(latent_rng);
    double p = sd0 * draw_normal(latent_rng);
    for (std::size_t t = 0; t < ny; ++t) {
      if (t > 0) {
        g += std::sqrt(config.sigma_gdp) * draw_normal(latent_rng);
        p += std::sqrt(config.sigma_pop) * draw_normal(latent_rng);
      }
      truth.theta_gdp[c * ny + t] = g;
      truth.theta_pop[c * ny + t] = p;
    }
  }
  truth.alpha.resize(nj);
  for (std::size_t j = 0; j < nj; ++j) {
    truth.alpha[j] = config.items[j].intercept_anchor;
    if (config.jitter_intercepts)
      truth.alpha[j] += std::sqrt(config.intercept_variance) * draw_normal(alpha_rng);
  }

  // Country ids sort in generation order, so cell (c, t) = c * ny + t.
  const int width = static_cast<int>(std::to_string(nc).size());
  std::vector<Observation> obs;
  obs.reserve(nc * ny * nj);
  std::vector<unsigned char> mask(nc * ny * nj, 0);
  for (std::size_t c = 0; c < nc; ++c) {
    const auto country = fmt::format("C{:0{}}", c + 1, width);
    for (std::size_t t = 0; t < ny; ++t) {
      const std::size_t cell = c * ny + t;
      for (std::size_t j = 0; j < nj; ++j) {
        double link = 0.0;
        double tau = 0.0;
        switch (config.items[j].dimension) {
          case Dimension::Gdp:
            link = truth.theta_gdp[cell];
            tau = config.tau_gdp;
            break;
          case Dimension::Pop:
            link = truth.theta_pop[cell];
            tau = config.tau_pop;
            break;
          default:
            link = truth.theta_gdp[cell] - truth.theta_pop[cell];
            tau = config.tau_gdppc;
            break;
        }
        const double y = truth.alpha[j] + link + draw_normal(noise_rng) / std::sqrt(tau);
        obs.push_back({country, config.first_year + static_cast<int>(t),
                       config.items[j].item_id, y});
        mask[cell * nj + j] = draw_uniform(mask_rng) >= config.missing_rate ? 1 : 0;
      }
    }
  }
  Panel full = build_panel(obs, config.items);
  out.complete_values = full.values();
  out.panel = full.with_mask(std::move(mask));
  return out;
}

void write_true_params(const std::filesystem::path& path, const SimulatedPanel& sim) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  const auto& t = sim.truth;
  const auto& panel = sim.panel;
  out << fmt::format("sigma_gdp={:.17g}\nsigma_pop={:.17g}\n", t.sigma_gdp, t.sigma_pop);
  out << fmt::format("tau_gdp={:.17g}\ntau_pop={:.17g}\ntau_gdppc={:.17g}\n", t.tau[0], t.tau[1],
                     t.tau[2]);
  for (std::size_t j = 0; j < t.alpha.size(); ++j)
    out << fmt::format("alpha.{}={:.17g}\n", panel.item(j).item_id, t.alpha[j]);
  out << "country,year,theta_gdp,theta_pop\n";
  for (std::size_t c = 0; c < panel.num_countries(); ++c)
    for (std::size_t y = 0; y < panel.num_years(c); ++y) {
      const auto cell = panel.cell(c, y);
      out << fmt::format("{},{},{:.17g},{:.17g}\n", panel.countries()[c],
                         panel.first_year(c) + static_cast<int>(y), t.theta_gdp[cell],
                         t.theta_pop[cell]);
    }
}

}  // namespace lgdp
