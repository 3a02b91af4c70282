#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "lgdp/error.hpp"
#include "lgdp/posterior.hpp"
#include "lgdp/run.hpp"
#include "support.hpp"

using namespace lgdp;

namespace {

std::vector<double> iid_normal(std::size_t n, double mean, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(mean, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("summary of {1, 2, 3}") {
  const std::vector<double> v{1.0, 2.0, 3.0};
  const auto s = summarize_values(v, 1);
  CHECK(s.mean == 2.0);
  CHECK(s.sd == doctest::Approx(1.0));
  CHECK(s.quantiles[2] == 2.0);
  CHECK(s.quantiles[0] == doctest::Approx(1.05));
  CHECK(s.quantiles[4] == doctest::Approx(2.95));
  CHECK(s.n_draws == 3);
}

TEST_CASE("summary of a constant") {
  const std::vector<double> v(50, 4.25);
  const auto s = summarize_values(v, 2);
  CHECK(s.mean == 4.25);
  CHECK(s.sd == 0.0);
  for (double q : s.quantiles) CHECK(q == 4.25);
  CHECK(s.chain_means == std::vector<double>{4.25, 4.25});
}

TEST_CASE("summary of standard normal draws") {
  const auto v = iid_normal(40000, 0.0, 1);
  const auto s = summarize_values(v, 4);
  CHECK(std::abs(s.mean) < 0.02);
  CHECK(s.sd == doctest::Approx(1.0).epsilon(0.02));
  const std::array<double, 5> z{-1.959964, -0.994458, 0.0, 0.994458, 1.959964};
  for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(s.quantiles[k] - z[k]) < 0.04);
}

TEST_CASE("pooled summary ignores draw order") {
  auto v = iid_normal(999, 3.0, 2);
  const auto a = summarize_values(v, 1);
  std::mt19937_64 rng(8);
  std::shuffle(v.begin(), v.end(), rng);
  const auto b = summarize_values(v, 1);
  CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-12));
  CHECK(a.sd == doctest::Approx(b.sd).epsilon(1e-12));
  CHECK(a.quantiles == b.quantiles);
}

TEST_CASE("summary rejects empty input and skips non-finite draws") {
  CHECK_THROWS_AS(summarize_values(std::vector<double>{}, 1), InputError);
  CHECK_THROWS_AS(summarize_values(std::vector<double>{1, 2, 3}, 2), InputError);
  const std::vector<double> v{std::nan(""), 1.0, 3.0, std::nan("")};
  const auto s = summarize_values(v, 2);
  CHECK(s.n_draws == 2);
  CHECK(s.mean == 2.0);
  const auto none = summarize_values(std::vector<double>(4, std::nan("")), 2);
  CHECK_FALSE(none.defined());
  CHECK(std::isnan(none.mean));
}

TEST_CASE("quantile_sorted interpolates linearly") {
  const std::vector<double> v{0.0, 10.0};
  CHECK(quantile_sorted(v, 0.0) == 0.0);
  CHECK(quantile_sorted(v, 0.25) == 2.5);
  CHECK(quantile_sorted(v, 1.0) == 10.0);
}

TEST_CASE("PSR of iid chains is near one and flags separated chains") {
  const auto iid = iid_normal(4000, 0.0, 3);
  const double r = potential_scale_reduction(iid, 4);
  CHECK(r > 0.99);
  CHECK(r < 1.05);

  auto split = iid_normal(2000, 0.0, 4);
  const auto far = iid_normal(2000, 100.0, 5);
  split.insert(split.end(), far.begin(), far.end());
  CHECK(potential_scale_reduction(split, 2) > 1.1);
  CHECK(std::isnan(potential_scale_reduction(iid, 1)));
  CHECK(potential_scale_reduction(std::vector<double>(10, 1.0), 2) == 1.0);
}

TEST_CASE("ESS of iid and autocorrelated draws") {
  const auto iid = iid_normal(8000, 0.0, 6);
  CHECK(effective_sample_size(iid, 4) == doctest::Approx(8000).epsilon(0.2));

  std::mt19937_64 rng(7);
  std::normal_distribution<double> d(0.0, 1.0);
  const double rho = 0.9;
  std::vector<double> ar;
  for (int c = 0; c < 4; ++c) {
    double x = d(rng) / std::sqrt(1 - rho * rho);
    for (int i = 0; i < 20000; ++i) {
      x = rho * x + d(rng);
      ar.push_back(x);
    }
  }
  const double expected = 80000.0 * (1 - rho) / (1 + rho);
  CHECK(effective_sample_size(ar, 4) == doctest::Approx(expected).epsilon(0.25));
}

TEST_CASE("store summaries, diagnostics and the estimate table") {
  const std::vector<Observation> obs{{"A", 2000, 1, 1.0}, {"A", 2002, 2, 0.3},
                                     {"B", 1999, 3, 0.7}, {"B", 1999, 1, 1.1}};
  const auto panel = build_panel(obs, test::specs(1, 1, 1));
  const Model model(panel);
  SamplerPlan plan;
  plan.n_chains = 3;
  plan.n_iterations = 60;
  plan.n_burnin = 20;
  plan.thinning = 2;
  plan.threads = 1;
  test::TempDir dir("post");
  const auto store = run_chains(model, PriorConfig{}, plan, dir / "draws");
  const auto summary = summarize(store);
  CHECK(summary.chains == 3);
  CHECK(summary.draws_per_chain == 20);
  for (const auto& e : summary.at("theta_gdp")) CHECK(e.n_draws == 60);
  CHECK(summary.at("ypred").size() == panel.num_cells() * 3);
  CHECK_THROWS_AS(summary.at("nothing"), StoreError);

  const auto direct = summarize_values(test::pooled(store, "alpha", 2), 3);
  CHECK(summary.at("alpha")[2].mean == doctest::Approx(direct.mean).epsilon(1e-12));

  const auto report = diagnose(store);
  CHECK(report.psr_available);
  CHECK(report.chains == 3);
  for (const auto& e : report.entries) CHECK(e.param != "ypred");
  CHECK(report.max_psr >= 1.0 - 1e-9);
  write_convergence_report(dir / "conv.txt", report);
  CHECK(test::read_file(dir / "conv.txt").find("max_psr") != std::string::npos);

  export_estimates(summary, panel, dir / "est.csv");
  const auto lines = lines_of(test::read_file(dir / "est.csv"));
  REQUIRE(!lines.empty());
  CHECK(lines[0] == kEstimateHeader);
  std::size_t items = 0, latents = 0, observed = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    REQUIRE(f.size() == 15);
    if (f[0] == "item") {
      ++items;
      if (f[6] == "1") {
        ++observed;
        CHECK_FALSE(f[7].empty());
      } else {
        CHECK(f[7].empty());
      }
    } else {
      CHECK(f[0] == "latent");
      ++latents;
    }
  }
  CHECK(items == panel.num_cells() * 3);
  CHECK(latents == panel.num_cells() * 3);
  CHECK(observed == panel.num_observed());

  const auto other = build_panel(std::vector<Observation>{{"A", 2000, 1, 1.0}}, test::specs(1, 1, 1));
  CHECK_THROWS_AS(export_estimates(summary, other, dir / "bad.csv"), StoreError);
}

TEST_CASE("single-chain diagnostics report PSR as unavailable") {
  const Model model(build_panel(std::vector<Observation>{{"A", 2000, 1, 1.0}}, test::specs(1, 0, 0)));
  SamplerPlan plan;
  plan.n_chains = 1;
  plan.n_iterations = 30;
  plan.n_burnin = 10;
  plan.threads = 1;
  test::TempDir dir("single");
  const auto store = run_chains(model, PriorConfig{}, plan, dir / "draws");
  const auto report = diagnose(store);
  CHECK_FALSE(report.psr_available);
  CHECK_FALSE(report.converged());
}
