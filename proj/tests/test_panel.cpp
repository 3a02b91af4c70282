#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "lgdp/error.hpp"
#include "lgdp/ingest.hpp"
#include "lgdp/panel.hpp"
#include "support.hpp"

using namespace lgdp;

namespace {
auto sorted(std::vector<Observation> v) {
  std::sort(v.begin(), v.end(), [](const Observation& a, const Observation& b) {
    return std::tie(a.country, a.year, a.item_id) < std::tie(b.country, b.year, b.item_id);
  });
  return v;
}
}  // namespace

TEST_CASE("build_panel: singleton observation") {
  const std::vector<Observation> obs{{"GHA", 1950, 1, 9.1}};
  const auto catalog = default_item_catalog();
  const auto p = build_panel(obs, catalog);
  CHECK(p.num_countries() == 1);
  CHECK(p.num_years(0) == 1);
  CHECK(p.first_year(0) == 1950);
  CHECK(p.num_items() == 16);
  CHECK(p.num_observed() == 1);
  CHECK(p.observed(0, 0));
  CHECK(p.value(0, 0) == 9.1);
}

TEST_CASE("build_panel: year range is padded contiguously") {
  const std::vector<Observation> obs{{"GHA", 1950, 1, 9.1}, {"GHA", 1953, 1, 9.3}};
  const auto p = build_panel(obs, test::specs(1, 0, 0));
  REQUIRE(p.num_years(0) == 4);
  CHECK(p.first_year(0) == 1950);
  CHECK(p.observed(p.cell(0, 0), 0));
  CHECK_FALSE(p.observed(p.cell(0, 1), 0));
  CHECK_FALSE(p.observed(p.cell(0, 2), 0));
  CHECK(p.observed(p.cell(0, 3), 0));
}

TEST_CASE("build_panel: duplicate triple names the triple") {
  const std::vector<Observation> obs{{"GHA", 1950, 1, 9.1}, {"GHA", 1950, 1, 9.2}};
  try {
    build_panel(obs, test::specs(1, 0, 0));
    FAIL("expected an error");
  } catch (const InputError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("GHA") != std::string::npos);
    CHECK(msg.find("1950") != std::string::npos);
  }
}

TEST_CASE("build_panel: non-finite values and unknown items are rejected") {
  const std::vector<Observation> nan{{"GHA", 1950, 1, std::numeric_limits<double>::quiet_NaN()}};
  CHECK_THROWS_AS(build_panel(nan, test::specs(1, 0, 0)), InputError);
  const std::vector<Observation> inf{{"GHA", 1950, 1, std::numeric_limits<double>::infinity()}};
  CHECK_THROWS_AS(build_panel(inf, test::specs(1, 0, 0)), InputError);
  const std::vector<Observation> unknown{{"GHA", 1950, 99, 1.0}};
  CHECK_THROWS_AS(build_panel(unknown, test::specs(1, 0, 0)), InputError);
  auto twice = test::specs(1, 0, 0);
  twice.push_back(twice[0]);
  const std::vector<Observation> ok{{"GHA", 1950, 1, 1.0}};
  CHECK_THROWS_AS(build_panel(ok, twice), InputError);
}

TEST_CASE("build_panel: countries sorted, items sorted by id, layout deterministic") {
  std::vector<ItemSpec> items{test::spec(7, Dimension::Pop), test::spec(2, Dimension::Gdp)};
  const std::vector<Observation> obs{
      {"USA", 2000, 7, 1.0}, {"ARG", 1990, 2, 2.0}, {"GHA", 1995, 2, 3.0}, {"ARG", 1992, 7, 4.0}};
  const auto p = build_panel(obs, items);
  CHECK(p.countries() == std::vector<std::string>{"ARG", "GHA", "USA"});
  CHECK(p.item(0).item_id == 2);
  CHECK(p.item(1).item_id == 7);
  CHECK(p.num_years(0) == 3);
  CHECK(p.offset(1) == 3);
  CHECK(p.value(p.cell(0, 2), 1) == 4.0);
  auto reversed = obs;
  std::reverse(reversed.begin(), reversed.end());
  const auto q = build_panel(reversed, items);
  CHECK(q.values() == p.values());
  CHECK(q.mask() == p.mask());
}

TEST_CASE("item_counts examples") {
  const std::vector<Observation> one{{"GHA", 1950, 1, 9.1}, {"GHA", 1952, 2, 9.1}};
  const auto p = build_panel(one, test::specs(5, 5, 0));
  const auto empty = p.with_mask(std::vector<unsigned char>(p.mask().size(), 0));
  for (int n : item_counts(empty)) CHECK(n == 0);

  const auto counts = item_counts(p);
  CHECK(counts == std::vector<int>{1, 0, 1});

  std::vector<Observation> ten;
  for (int j = 1; j <= 10; ++j) ten.push_back({"GHA", 1950, j, 1.0 * j});
  CHECK(item_counts(build_panel(ten, test::specs(5, 5, 0))) == std::vector<int>{10});
}

TEST_CASE("flatten round-trips and counts sum to the number of triples") {
  const std::vector<Observation> obs{{"B", 2001, 3, 0.5}, {"A", 1999, 1, 1.5}, {"A", 2003, 2, 2.5},
                                     {"B", 2001, 1, 3.5}, {"A", 2000, 3, 4.5}};
  const auto p = build_panel(obs, test::specs(1, 1, 1));
  CHECK(sorted(flatten(p)) == sorted(obs));
  const auto counts = item_counts(p);
  CHECK(std::accumulate(counts.begin(), counts.end(), 0) == 5);
}

TEST_CASE("with_mask may only remove observations") {
  const std::vector<Observation> obs{{"A", 2000, 1, 1.0}, {"A", 2001, 2, 1.0}};
  const auto p = build_panel(obs, test::specs(2, 0, 0));
  auto m = p.mask();
  m[0] = 0;
  CHECK(p.with_mask(m).num_observed() == 1);
  auto bad = p.mask();
  bad[1] = 1;
  CHECK_THROWS_AS(p.with_mask(bad), InputError);
  CHECK_THROWS_AS(p.with_mask({1}), InputError);
}

TEST_CASE("with_extra_items appends unobserved items") {
  const std::vector<Observation> obs{{"A", 2000, 1, 1.0}, {"A", 2001, 1, 2.0}};
  const auto p = build_panel(obs, test::specs(1, 0, 0));
  const std::vector<ItemSpec> extra{test::spec(17, Dimension::Growth)};
  const auto q = p.with_extra_items(extra);
  REQUIRE(q.num_items() == 2);
  CHECK(q.item(1).item_id == 17);
  CHECK(q.num_observed() == 2);
  CHECK(q.value(q.cell(0, 1), 0) == 2.0);
  const std::vector<ItemSpec> clash{test::spec(1, Dimension::Gdp)};
  CHECK_THROWS_AS(p.with_extra_items(clash), InputError);
}

TEST_CASE("dimension names round-trip") {
  for (auto d : {Dimension::Gdp, Dimension::Pop, Dimension::Gdppc, Dimension::Growth})
    CHECK(parse_dimension(to_string(d)) == d);
  CHECK_THROWS_AS(parse_dimension("gnp"), InputError);
}
