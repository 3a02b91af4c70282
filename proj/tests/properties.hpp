#pragma once

// Randomized invariant checks shared by the unit suite and the acceptance
// binary. Each returns an empty string on success, else a description of
// the first failing case.

#include <random>
#include <string>

#include <fmt/format.h>

#include "lgdp/gibbs.hpp"
#include "lgdp/validate.hpp"

namespace lgdp::test {

namespace detail {

inline Panel random_panel(std::mt19937_64& rng, double observed_rate) {
  std::uniform_int_distribution<int> countries(1, 3), years(1, 6), items(1, 5), dim(0, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> value(0.0, 2.0);
  const int nj = items(rng);
  std::vector<ItemSpec> specs;
  for (int j = 0; j < nj; ++j) {
    ItemSpec s;
    s.item_id = j + 1;
    s.name = fmt::format("item {}", j + 1);
    s.dimension = static_cast<Dimension>(dim(rng));
    s.intercept_anchor = value(rng);
    specs.push_back(s);
  }
  std::vector<Observation> obs;
  const int nc = countries(rng);
  for (int c = 0; c < nc; ++c) {
    const int first = 1900 + c * 3;
    const int ny = years(rng);
    // first and last years are always observed so the range is fixed
    for (int t = 0; t < ny; ++t)
      for (int j = 0; j < nj; ++j)
        if (((t == 0 || t == ny - 1) && j == 0) || unit(rng) < observed_rate)
          obs.push_back({fmt::format("C{}", c), first + t, j + 1, value(rng)});
  }
  return build_panel(obs, specs);
}

inline void randomize_state(ChainState& s, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.5);
  std::uniform_real_distribution<double> pos(0.05, 5.0), var(0.01, 0.99);
  for (auto& v : s.theta_gdp) v = n(rng);
  for (auto& v : s.theta_pop) v = n(rng);
  for (auto& v : s.alpha) v = n(rng);
  for (auto& v : s.tau) v = pos(rng);
  s.sigma = {var(rng), var(rng)};
}

}  // namespace detail

/// Adding an item with no observations leaves every latent, innovation and
/// precision conditional and every existing intercept conditional exactly
/// unchanged; the new intercept's conditional is its prior.
inline std::string check_missing_data_neutrality(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim(0, 2);
  const PriorConfig prior;
  SamplerPlan plan;
  plan.n_iterations = 1;
  plan.n_burnin = 0;
  for (int k = 0; k < cases; ++k) {
    const auto panel = detail::random_panel(rng, 0.5);
    ItemSpec extra;
    extra.item_id = 100;
    extra.name = "unobserved";
    extra.dimension = static_cast<Dimension>(dim(rng));
    extra.intercept_anchor = 1.25;
    const Model base(panel);
    const Model grown(panel.with_extra_items(std::span<const ItemSpec>(&extra, 1)));
    auto a = init_chain(base, prior, plan, 0);
    detail::randomize_state(a, rng);
    auto b = init_chain(grown, prior, plan, 0);
    b.theta_gdp = a.theta_gdp;
    b.theta_pop = a.theta_pop;
    b.tau = a.tau;
    b.sigma = a.sigma;
    b.alpha = a.alpha;
    b.alpha.push_back(0.3);

    auto fail = [&](const std::string& what) {
      return fmt::format("case {}: {} differs", k, what);
    };
    for (std::size_t c = 0; c < panel.num_countries(); ++c)
      for (std::size_t t = 0; t < panel.num_years(c); ++t)
        for (auto d : {LatentDim::Gdp, LatentDim::Pop}) {
          const auto x = latent_conditional(a, base, prior, c, t, d);
          const auto y = latent_conditional(b, grown, prior, c, t, d);
          if (x.mean != y.mean || x.precision != y.precision)
            return fail(fmt::format("latent ({}, {}, {})", c, t, to_string(d)));
        }
    for (std::size_t j = 0; j < panel.num_items(); ++j) {
      const auto x = intercept_conditional(a, base, prior, j);
      const auto y = intercept_conditional(b, grown, prior, j);
      if (x.mean != y.mean || x.precision != y.precision)
        return fail(fmt::format("intercept {}", j));
    }
    for (int cat = 0; cat < base.num_categories(); ++cat) {
      const auto x = precision_conditional(a, base, prior, cat);
      const auto y = precision_conditional(b, grown, prior, cat);
      if (x.shape != y.shape || x.rate != y.rate) return fail(fmt::format("precision {}", cat));
    }
    for (auto d : {LatentDim::Gdp, LatentDim::Pop}) {
      const auto x = innovation_conditional(a, base, d);
      const auto y = innovation_conditional(b, grown, d);
      if (x.increments != y.increments || x.sum_sq != y.sum_sq) return fail("innovation");
    }
    const auto added = intercept_conditional(b, grown, prior, panel.num_items());
    if (added.mean != extra.intercept_anchor || added.precision != 1.0 / prior.intercept_variance)
      return fail("new intercept prior");
  }
  return {};
}

/// For random panels and predictive summaries, coverage proportions are
/// nondecreasing in the sd multiplier for every item and for the weighted
/// row, and the weighted row is the observation-weighted mean of the items.
inline std::string check_monotone_coverage(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::student_t_distribution<double> heavy(2.0);
  for (int k = 0; k < cases; ++k) {
    const auto panel = detail::random_panel(rng, 0.6);
    PosteriorSummary s;
    s.layout = StoreLayout::from_panel(panel);
    s.chains = 1;
    s.draws_per_chain = 10;
    const std::size_t nj = panel.num_items();
    std::vector<ElementSummary> ypred(panel.num_cells() * nj);
    for (std::size_t slot = 0; slot < ypred.size(); ++slot) {
      auto& e = ypred[slot];
      e.n_draws = 10;
      e.mean = 3.0 * heavy(rng);
      e.sd = unit(rng) < 0.05 ? 0.0 : 0.01 + 2.0 * unit(rng);
    }
    s.params["ypred"] = ypred;
    const auto table = zscores(panel, s);
    std::size_t usable = 0;
    for (const auto& r : table.rows) usable += !r.flagged;
    if (usable == 0) continue;
    const auto cov = coverage(table);
    auto monotone = [](const CoverageRow& r) {
      return r.within1 <= r.within2 && r.within2 <= r.within3 && r.within1 >= 0.0 &&
             r.within3 <= 1.0;
    };
    double w1 = 0.0, w2 = 0.0, w3 = 0.0;
    std::size_t n = 0;
    for (const auto& r : cov.items) {
      if (!monotone(r)) return fmt::format("case {}: item {} not monotone", k, r.item_id);
      const double m = static_cast<double>(r.n);
      w1 += r.within1 * m;
      w2 += r.within2 * m;
      w3 += r.within3 * m;
      n += r.n;
    }
    if (!monotone(cov.weighted)) return fmt::format("case {}: weighted row not monotone", k);
    const double nn = static_cast<double>(n);
    if (n != cov.weighted.n || std::abs(w1 / nn - cov.weighted.within1) > 1e-12 ||
        std::abs(w2 / nn - cov.weighted.within2) > 1e-12 ||
        std::abs(w3 / nn - cov.weighted.within3) > 1e-12)
      return fmt::format("case {}: weighted row is not the weighted item mean", k);
  }
  return {};
}

}  // namespace lgdp::test
