#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "lgdp/config.hpp"
#include "lgdp/model.hpp"

namespace lgdp {

enum class GrowthTransform { Difference, RatioMinusOne, LogGrowth };

GrowthTransform parse_growth_transform(std::string_view text);
std::string_view to_string(GrowthTransform t);

/// Growth of one latent between year t and t - lag.
///   difference:      theta_t - theta_prev
///   ratio-minus-one: theta_t / theta_prev - 1   (throws InputError when theta_prev == 0)
///   log-growth:      exp(theta_t - theta_prev) - 1
double derived_growth(double theta_t, double theta_prev, GrowthTransform transform);

/// A deterministic link from lagged latents to a set of growth items.
struct DerivedLink {
  std::string name;
  LatentDim input = LatentDim::Gdp;
  int lag = 1;
  GrowthTransform transform = GrowthTransform::RatioMinusOne;
  std::vector<int> target_items;

  Link as_link() const;
};

/// Named links declared in a configuration:
///   extension.<name>.transform = difference | ratio-minus-one | log-growth
///   extension.<name>.input     = gdp | pop
///   extension.<name>.lag       = 1
///   extension.<name>.items     = 17[,18...]
class LinkRegistry {
 public:
  void add(DerivedLink link);
  /// Throws InputError for an unknown name.
  const DerivedLink& find(std::string_view name) const;
  const std::map<std::string, DerivedLink, std::less<>>& links() const { return links_; }

  static LinkRegistry from_config(const Config& cfg);

 private:
  std::map<std::string, DerivedLink, std::less<>> links_;
};

/// Attaches `link` to its target items. Items in `new_items` that are not in
/// the panel are appended unobserved (growth dimension, anchor 0, fixed
/// intercept unless stated otherwise). Target items must be growth items.
/// The resulting model gains a growth precision category, and stores the
/// link's value for every country-year as a derived latent.
Model register_extension(const Model& base, const DerivedLink& link,
                         std::span<const ItemSpec> new_items = {});

/// Applies every registry entry in name order.
Model register_extensions(const Model& base, const LinkRegistry& registry);

}  // namespace lgdp
