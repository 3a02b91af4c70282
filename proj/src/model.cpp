#include "lgdp/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "lgdp/error.hpp"

namespace lgdp {

std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::Identity: return "identity";
    case Transform::Difference: return "difference";
    case Transform::Ratio: return "ratio";
    case Transform::RatioMinusOne: return "ratio-minus-one";
    case Transform::LogGrowth: return "log-growth";
  }
  return "?";
}

int Link::max_lag() const {
  int m = 0;
  for (const auto& in : inputs) m = std::max(m, in.lag);
  return m;
}

double Link::eval(std::span<const double> x) const {
  switch (transform) {
    case Transform::Identity: return x[0];
    case Transform::Difference: return x[0] - x[1];
    case Transform::Ratio: return x[0] / x[1];
    case Transform::RatioMinusOne: return x[0] / x[1] - 1.0;
    case Transform::LogGrowth: return std::exp(x[0] - x[1]) - 1.0;
  }
  return 0.0;
}

GdppcForm parse_gdppc_form(std::string_view text) {
  if (text == "log-difference") return GdppcForm::LogDifference;
  if (text == "ratio") return GdppcForm::Ratio;
  throw InputError(fmt::format("unknown gdppc link '{}' (log-difference | ratio)", text));
}

Model::Model(Panel panel, GdppcForm gdppc)
    : panel_(std::make_shared<const Panel>(std::move(panel))), gdppc_(gdppc) {
  for (const auto& spec : panel_->items()) {
    switch (spec.dimension) {
      case Dimension::Gdp: links_.push_back(Link::identity(LatentDim::Gdp)); break;
      case Dimension::Pop: links_.push_back(Link::identity(LatentDim::Pop)); break;
      case Dimension::Gdppc:
        links_.push_back({gdppc == GdppcForm::LogDifference ? Transform::Difference
                                                            : Transform::Ratio,
                          {{LatentDim::Gdp, 0}, {LatentDim::Pop, 0}}});
        break;
      case Dimension::Growth:
        // Linked later through register_extension.
        links_.push_back({Transform::Identity, {}});
        break;
    }
  }
  finalize();
}

Model Model::with_links(std::shared_ptr<const Panel> panel, std::vector<Link> links,
                        std::vector<DerivedSeries> derived) const {
  Model m;
  m.panel_ = std::move(panel);
  m.gdppc_ = gdppc_;
  m.links_ = std::move(links);
  m.derived_ = std::move(derived);
  m.finalize();
  return m;
}

void Model::finalize() {
  if (links_.size() != panel_->num_items()) throw InternalError("one link per item required");
  max_lag_.clear();
  warnings_.clear();
  num_categories_ = 3;
  for (std::size_t j = 0; j < links_.size(); ++j) {
    max_lag_.push_back(links_[j].max_lag());
    num_categories_ = std::max(num_categories_, category(j) + 1);
    if (max_lag_[j] == 0) continue;
    for (std::size_t c = 0; c < panel_->num_countries(); ++c) {
      const auto limit = std::min<std::size_t>(static_cast<std::size_t>(max_lag_[j]),
                                               panel_->num_years(c));
      for (std::size_t t = 0; t < limit; ++t)
        if (panel_->observed(panel_->cell(c, t), j))
          warnings_.push_back(fmt::format(
              "item {} observed at ({}, {}) needs a lag before the first year; cell skipped",
              panel_->item(j).item_id, panel_->countries()[c],
              panel_->first_year(c) + static_cast<int>(t)));
    }
  }
}

void Model::require_linked() const {
  for (std::size_t j = 0; j < links_.size(); ++j)
    if (links_[j].inputs.empty())
      throw InputError(fmt::format(
          "item {} ({}) is a growth item but no extension link is registered for it",
          panel_->item(j).item_id, panel_->item(j).name));
}

double Model::link_value(std::size_t j, std::size_t c, std::size_t t,
                         std::span<const double> theta_gdp,
                         std::span<const double> theta_pop) const {
  const auto& link = links_[j];
  double x[2] = {0.0, 0.0};
  for (std::size_t k = 0; k < link.inputs.size(); ++k) {
    const auto& in = link.inputs[k];
    const auto cell = panel_->cell(c, t - static_cast<std::size_t>(in.lag));
    x[k] = in.dim == LatentDim::Gdp ? theta_gdp[cell] : theta_pop[cell];
  }
  return link.eval({x, link.inputs.size()});
}

}  // namespace lgdp
