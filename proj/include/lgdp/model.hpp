#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lgdp/panel.hpp"

namespace lgdp {

/// How an item's expected value depends on the free latents.
enum class Transform {
  Identity,       // x0
  Difference,     // x0 - x1
  Ratio,          // x0 / x1
  RatioMinusOne,  // x0 / x1 - 1
  LogGrowth,      // exp(x0 - x1) - 1
};

std::string_view to_string(Transform t);

struct LinkInput {
  LatentDim dim = LatentDim::Gdp;
  int lag = 0;
};

/// Deterministic map from latent values to an item's expected value
/// (before the intercept).
struct Link {
  Transform transform = Transform::Identity;
  std::vector<LinkInput> inputs;

  static Link identity(LatentDim d) { return {Transform::Identity, {{d, 0}}}; }

  bool linear() const {
    return transform == Transform::Identity || transform == Transform::Difference;
  }
  /// d(link)/d(input k) for linear links.
  double coefficient(std::size_t k) const { return k == 0 ? 1.0 : -1.0; }
  int max_lag() const;
  /// Requires inputs.size() values, ordered as inputs.
  double eval(std::span<const double> x) const;
};

/// Latent GDP per capita: the difference of the log GDP and log population
/// latents.
inline double derived_gdppc(double theta_gdp, double theta_pop) { return theta_gdp - theta_pop; }

/// GDPPC link variant. Ratio divides the latents directly and exists only
/// for sensitivity runs.
enum class GdppcForm { LogDifference, Ratio };

GdppcForm parse_gdppc_form(std::string_view text);

/// A panel together with the emission link of every item. Emission
/// precisions are shared within a dimension: category(j) indexes tau.
class Model {
 public:
  explicit Model(Panel panel, GdppcForm gdppc = GdppcForm::LogDifference);

  const Panel& panel() const { return *panel_; }
  std::shared_ptr<const Panel> panel_ptr() const { return panel_; }
  GdppcForm gdppc_form() const { return gdppc_; }

  const Link& link(std::size_t j) const { return links_[j]; }
  int category(std::size_t j) const { return static_cast<int>(panel_->item(j).dimension); }
  int num_categories() const { return num_categories_; }

  /// Every lagged input of item j exists at year t of country c.
  bool defined([[maybe_unused]] std::size_t c, std::size_t t, std::size_t j) const {
    return t >= static_cast<std::size_t>(max_lag_[j]);
  }
  /// Observed and defined.
  bool usable(std::size_t c, std::size_t t, std::size_t j) const {
    return defined(c, t, j) && panel_->observed(panel_->cell(c, t), j);
  }

  double link_value(std::size_t j, std::size_t c, std::size_t t, std::span<const double> theta_gdp,
                    std::span<const double> theta_pop) const;

  /// Throws InputError if a growth item has no registered link.
  void require_linked() const;

  /// Registered growth-style links (name, link), stored as derived latents.
  struct DerivedSeries {
    std::string name;
    Link link;
  };
  const std::vector<DerivedSeries>& derived_series() const { return derived_; }

  /// Messages about observed cells ignored because a lag falls before the
  /// country's first year.
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Used by the extension registry.
  Model with_links(std::shared_ptr<const Panel> panel, std::vector<Link> links,
                   std::vector<DerivedSeries> derived) const;

 private:
  Model() = default;
  void finalize();

  std::shared_ptr<const Panel> panel_;
  GdppcForm gdppc_ = GdppcForm::LogDifference;
  std::vector<Link> links_;
  std::vector<int> max_lag_;
  std::vector<DerivedSeries> derived_;
  std::vector<std::string> warnings_;
  int num_categories_ = 3;
};

}  // namespace lgdp
