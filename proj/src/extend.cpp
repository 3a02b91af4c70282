#include "lgdp/extend.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "lgdp/error.hpp"

namespace lgdp {

GrowthTransform parse_growth_transform(std::string_view text) {
  if (text == "difference") return GrowthTransform::Difference;
  if (text == "ratio-minus-one") return GrowthTransform::RatioMinusOne;
  if (text == "log-growth") return GrowthTransform::LogGrowth;
  throw InputError(fmt::format(
      "unknown growth transform '{}' (difference | ratio-minus-one | log-growth)", text));
}

std::string_view to_string(GrowthTransform t) {
  switch (t) {
    case GrowthTransform::Difference: return "difference";
    case GrowthTransform::RatioMinusOne: return "ratio-minus-one";
    case GrowthTransform::LogGrowth: return "log-growth";
  }
  return "?";
}

double derived_growth(double theta_t, double theta_prev, GrowthTransform transform) {
  switch (transform) {
    case GrowthTransform::Difference: return theta_t - theta_prev;
    case GrowthTransform::RatioMinusOne:
      if (theta_prev == 0.0) throw InputError("ratio-minus-one growth with a zero denominator");
      return theta_t / theta_prev - 1.0;
    case GrowthTransform::LogGrowth: return std::exp(theta_t - theta_prev) - 1.0;
  }
  return 0.0;
}

Link DerivedLink::as_link() const {
  Transform t = Transform::Difference;
  if (transform == GrowthTransform::RatioMinusOne) t = Transform::RatioMinusOne;
  if (transform == GrowthTransform::LogGrowth) t = Transform::LogGrowth;
  return {t, {{input, 0}, {input, lag}}};
}

void LinkRegistry::add(DerivedLink link) {
  if (link.lag < 0) throw InputError(fmt::format("extension {}: negative lag", link.name));
  auto name = link.name;
  if (!links_.emplace(name, std::move(link)).second)
    throw InputError(fmt::format("extension {} declared twice", name));
}

const DerivedLink& LinkRegistry::find(std::string_view name) const {
  auto it = links_.find(name);
  if (it == links_.end()) throw InputError(fmt::format("unknown extension link '{}'", name));
  return it->second;
}

LinkRegistry LinkRegistry::from_config(const Config& cfg) {
  std::map<std::string, DerivedLink> pending;
  for (const auto& key : cfg.keys_with_prefix("extension.")) {
    const auto parts = split(key, '.');
    if (parts.size() != 3) throw InputError(fmt::format("malformed extension key '{}'", key));
    auto& link = pending[parts[1]];
    link.name = parts[1];
    const auto& field = parts[2];
    if (field == "transform") {
      link.transform = parse_growth_transform(*cfg.get(key));
    } else if (field == "input") {
      const auto v = *cfg.get(key);
      if (v == "gdp") {
        link.input = LatentDim::Gdp;
      } else if (v == "pop") {
        link.input = LatentDim::Pop;
      } else {
        throw InputError(fmt::format("{}: input must be gdp or pop", key));
      }
    } else if (field == "lag") {
      link.lag = static_cast<int>(cfg.get_int(key, 1));
    } else if (field == "items") {
      for (const auto& v : cfg.get_list(key))
        link.target_items.push_back(static_cast<int>(parse_int(v, key)));
    } else {
      throw InputError(fmt::format("unknown extension field in '{}'", key));
    }
  }
  LinkRegistry reg;
  for (auto& [name, link] : pending) reg.add(std::move(link));

  // item.<id>.link = <name> must name a declared extension.
  for (const auto& key : cfg.keys_with_prefix("item.")) {
    const auto parts = split(key, '.');
    if (parts.size() != 3 || parts[2] != "link") continue;
    const auto& link = reg.find(*cfg.get(key));
    const int id = static_cast<int>(parse_int(parts[1], key));
    if (std::find(link.target_items.begin(), link.target_items.end(), id) ==
        link.target_items.end()) {
      auto copy = link;
      copy.target_items.push_back(id);
      reg.links_[copy.name] = std::move(copy);
    }
  }
  return reg;
}

Model register_extension(const Model& base, const DerivedLink& link,
                         std::span<const ItemSpec> new_items) {
  if (link.lag < 0) throw InputError(fmt::format("extension {}: negative lag", link.name));
  if (link.target_items.empty())
    throw InputError(fmt::format("extension {} has no target items", link.name));

  std::vector<ItemSpec> extra;
  for (const auto& spec : new_items) {
    if (base.panel().item_index(spec.item_id) >= 0) continue;
    ItemSpec s = spec;
    s.dimension = Dimension::Growth;
    extra.push_back(s);
  }
  std::sort(extra.begin(), extra.end(),
            [](const ItemSpec& a, const ItemSpec& b) { return a.item_id < b.item_id; });
  auto panel = extra.empty() ? base.panel_ptr()
                             : std::make_shared<const Panel>(base.panel().with_extra_items(extra));

  std::vector<Link> links;
  for (std::size_t j = 0; j < base.panel().num_items(); ++j) links.push_back(base.link(j));
  links.resize(panel->num_items(), Link{Transform::Identity, {}});

  for (int id : link.target_items) {
    const int j = panel->item_index(id);
    if (j < 0)
      throw InputError(fmt::format("extension {} targets unknown item {}", link.name, id));
    if (panel->item(static_cast<std::size_t>(j)).dimension != Dimension::Growth)
      throw InputError(
          fmt::format("extension {} targets item {} which is not a growth item", link.name, id));
    links[static_cast<std::size_t>(j)] = link.as_link();
  }
  auto derived = base.derived_series();
  derived.push_back({link.name, link.as_link()});
  return base.with_links(std::move(panel), std::move(links), std::move(derived));
}

Model register_extensions(const Model& base, const LinkRegistry& registry) {
  Model m = base;
  for (const auto& [name, link] : registry.links()) m = register_extension(m, link);
  return m;
}

}  // namespace lgdp
