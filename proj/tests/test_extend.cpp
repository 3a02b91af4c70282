#include <doctest.h>

#include <cmath>

#include "lgdp/error.hpp"
#include "lgdp/extend.hpp"
#include "lgdp/gibbs.hpp"
#include "lgdp/run.hpp"
#include "support.hpp"

using namespace lgdp;

namespace {

SamplerPlan plan_of(long long iterations, long long burnin) {
  SamplerPlan plan;
  plan.n_chains = 2;
  plan.n_iterations = iterations;
  plan.n_burnin = burnin;
  plan.seed = 21;
  plan.threads = 1;
  return plan;
}

DerivedLink growth_link(GrowthTransform t, std::vector<int> items, int lag = 1) {
  DerivedLink l;
  l.name = "gdpgrowth";
  l.input = LatentDim::Gdp;
  l.lag = lag;
  l.transform = t;
  l.target_items = std::move(items);
  return l;
}

std::vector<Observation> base_observations() {
  std::vector<Observation> obs;
  for (int y = 2000; y < 2006; ++y) {
    obs.push_back({"A", y, 1, 1.0 + 0.03 * (y - 2000)});
    obs.push_back({"A", y, 2, 0.5});
  }
  obs.push_back({"B", 1998, 1, 2.0});
  obs.push_back({"B", 1999, 3, 1.5});
  return obs;
}

}  // namespace

TEST_CASE("derived_growth examples") {
  CHECK(derived_growth(1.1, 1.0, GrowthTransform::Difference) == doctest::Approx(0.1));
  CHECK(derived_growth(1.1, 1.0, GrowthTransform::RatioMinusOne) == doctest::Approx(0.1));
  CHECK(derived_growth(5.0, 5.0, GrowthTransform::RatioMinusOne) == 0.0);
  CHECK(derived_growth(std::log(1.02), 0.0, GrowthTransform::LogGrowth) == doctest::Approx(0.02));
  CHECK_THROWS_AS(derived_growth(1.0, 0.0, GrowthTransform::RatioMinusOne), InputError);
  CHECK(parse_growth_transform("log-growth") == GrowthTransform::LogGrowth);
  CHECK_THROWS_AS(parse_growth_transform("growthy"), InputError);
}

TEST_CASE("link registry lookups and configuration") {
  LinkRegistry reg;
  reg.add(growth_link(GrowthTransform::Difference, {17}));
  CHECK(reg.find("gdpgrowth").target_items == std::vector<int>{17});
  CHECK_THROWS_AS(reg.find("popgrowth"), InputError);
  CHECK_THROWS_AS(reg.add(growth_link(GrowthTransform::Difference, {18})), InputError);

  const auto cfg = Config::parse(
      "extension.g.transform = log-growth\nextension.g.input = pop\nextension.g.lag = 2\n"
      "extension.g.items = 17\nitem.18.link = g\n");
  const auto r = LinkRegistry::from_config(cfg);
  const auto& g = r.find("g");
  CHECK(g.transform == GrowthTransform::LogGrowth);
  CHECK(g.input == LatentDim::Pop);
  CHECK(g.lag == 2);
  CHECK(g.target_items == std::vector<int>{17, 18});
  CHECK_THROWS_AS(LinkRegistry::from_config(Config::parse("item.18.link = nothing\n")),
                  InputError);
  CHECK_THROWS_AS(LinkRegistry::from_config(Config::parse("extension.g.input = gdppc\n")),
                  InputError);
  CHECK_THROWS_AS(LinkRegistry::from_config(Config::parse("extension.g.speed = 3\n")),
                  InputError);
}

TEST_CASE("register_extension validates its targets") {
  const Model base(build_panel(base_observations(), test::specs(2, 1, 0)));
  CHECK_THROWS_AS(register_extension(base, growth_link(GrowthTransform::Difference, {})),
                  InputError);
  CHECK_THROWS_AS(register_extension(base, growth_link(GrowthTransform::Difference, {1})),
                  InputError);
  CHECK_THROWS_AS(register_extension(base, growth_link(GrowthTransform::Difference, {99})),
                  InputError);
}

TEST_CASE("a growth item without a registered link is rejected") {
  auto items = test::specs(2, 1, 0);
  items.push_back(test::spec(17, Dimension::Growth));
  auto obs = base_observations();
  obs.push_back({"A", 2001, 17, 0.02});
  const Model model(build_panel(obs, items));
  CHECK_THROWS_AS(model.require_linked(), InputError);
  CHECK_THROWS_AS(init_chain(model, PriorConfig{}, plan_of(1, 0), 0), InputError);
  const auto linked = register_extension(model, growth_link(GrowthTransform::Difference, {17}));
  CHECK_NOTHROW(linked.require_linked());
  CHECK(linked.num_categories() == 4);
}

TEST_CASE("derived series is undefined before the lag is available") {
  const Model base(build_panel(base_observations(), test::specs(2, 1, 0)));
  const ItemSpec extra = test::spec(17, Dimension::Growth);
  const auto model =
      register_extension(base, growth_link(GrowthTransform::Difference, {17}, 2), {&extra, 1});
  auto s = init_chain(model, PriorConfig{}, plan_of(1, 0), 0);
  for (std::size_t i = 0; i < s.theta_gdp.size(); ++i) s.theta_gdp[i] = 0.5 * i;
  const auto series = derived_link_series(s, model, 0);
  const auto& panel = model.panel();
  for (std::size_t c = 0; c < panel.num_countries(); ++c)
    for (std::size_t t = 0; t < panel.num_years(c); ++t) {
      const double v = series[panel.cell(c, t)];
      if (t < 2) {
        CHECK(std::isnan(v));
      } else {
        CHECK(v == doctest::Approx(1.0));
      }
    }
}

TEST_CASE("stored growth draws equal the transform of the stored latents") {
  for (auto transform :
       {GrowthTransform::Difference, GrowthTransform::RatioMinusOne, GrowthTransform::LogGrowth}) {
    CAPTURE(to_string(transform));
    const Model base(build_panel(base_observations(), test::specs(2, 1, 0)));
    const ItemSpec extra = test::spec(17, Dimension::Growth);
    const auto model = register_extension(base, growth_link(transform, {17}), {&extra, 1});
    test::TempDir dir("growth");
    const auto store = run_chains(model, PriorConfig{}, plan_of(60, 20), dir / "draws");
    REQUIRE(store.has_param("growth.gdpgrowth"));
    const auto& panel = model.panel();
    for (std::size_t c = 0; c < panel.num_countries(); ++c)
      for (std::size_t t = 0; t < panel.num_years(c); ++t) {
        const auto cell = panel.cell(c, t);
        const auto g = test::pooled(store, "growth.gdpgrowth", cell);
        if (t == 0) {
          for (double v : g) CHECK(std::isnan(v));
          continue;
        }
        const auto now = test::pooled(store, "theta_gdp", cell);
        const auto prev = test::pooled(store, "theta_gdp", cell - 1);
        for (std::size_t d = 0; d < g.size(); ++d)
          CHECK(g[d] == derived_growth(now[d], prev[d], transform));
      }
  }
}

TEST_CASE("an unobserved extension leaves core draws unchanged") {
  const Model base(build_panel(base_observations(), test::specs(2, 1, 0)));
  std::vector<ItemSpec> extra{test::spec(17, Dimension::Growth), test::spec(18, Dimension::Growth)};
  const auto extended =
      register_extension(base, growth_link(GrowthTransform::LogGrowth, {17, 18}), extra);
  REQUIRE(extended.panel().num_items() == base.panel().num_items() + 2);

  for (auto schedule : {Schedule::SingleSite, Schedule::BlockedFfbs}) {
    auto plan = plan_of(300, 100);
    plan.schedule = schedule;
    test::TempDir dir("conservative");
    const auto a = run_chains(base, PriorConfig{}, plan, dir / "base");
    const auto b = run_chains(extended, PriorConfig{}, plan, dir / "ext");
    for (int c = 0; c < 2; ++c) {
      for (const char* p : {"theta_gdp", "theta_pop", "theta_gdppc", "sigma"})
        CHECK(test::read_file(DrawStore::chain_file(dir / "base", c, p)) ==
              test::read_file(DrawStore::chain_file(dir / "ext", c, p)));
      const std::size_t J = base.panel().num_items();
      CHECK(a.read("alpha", c, 0, J) == b.read("alpha", c, 0, J));
      CHECK(a.read("tau", c, 0, 3) == b.read("tau", c, 0, 3));
    }
  }
}

TEST_CASE("an observed growth item pulls the trajectory") {
  std::vector<Observation> obs;
  for (int y = 2000; y < 2011; ++y) {
    obs.push_back({"A", y, 1, 0.0});
    obs.push_back({"A", y, 17, 0.05});
  }
  auto items = test::specs(1, 0, 0);
  auto g = test::spec(17, Dimension::Growth);
  g.fixed_intercept = true;
  items.push_back(g);
  const auto model = register_extension(Model(build_panel(obs, items)),
                                        growth_link(GrowthTransform::Difference, {17}));
  auto plan = plan_of(4000, 1000);
  plan.fixed.tau = std::vector<double>{1.0, 1.0, 1.0, 1e6};
  test::TempDir dir("pull");
  const auto store = run_chains(model, PriorConfig{}, plan, dir / "draws");
  for (std::size_t t = 1; t < 11; ++t) {
    const auto now = test::pooled(store, "theta_gdp", t);
    const auto prev = test::pooled(store, "theta_gdp", t - 1);
    double m = 0.0;
    for (std::size_t d = 0; d < now.size(); ++d) m += now[d] - prev[d];
    m /= static_cast<double>(now.size());
    CHECK(m == doctest::Approx(0.05).epsilon(0.02));
  }
}

TEST_CASE("derived_growth fixed point and log identity") {
  for (auto t :
       {GrowthTransform::Difference, GrowthTransform::RatioMinusOne, GrowthTransform::LogGrowth})
    CHECK(derived_growth(2.5, 2.5, t) == 0.0);
  CHECK(std::abs(derived_growth(std::log(110.0), std::log(100.0), GrowthTransform::LogGrowth) -
                 0.1) < 1e-12);
}
