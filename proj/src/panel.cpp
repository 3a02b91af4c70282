#include "lgdp/panel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "lgdp/error.hpp"

namespace lgdp {

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::Gdp: return "gdp";
    case Dimension::Pop: return "pop";
    case Dimension::Gdppc: return "gdppc";
    case Dimension::Growth: return "growth";
  }
  return "?";
}

Dimension parse_dimension(std::string_view text) {
  if (text == "gdp") return Dimension::Gdp;
  if (text == "pop") return Dimension::Pop;
  if (text == "gdppc") return Dimension::Gdppc;
  if (text == "growth") return Dimension::Growth;
  throw InputError(fmt::format("unknown dimension '{}'", text));
}

std::string_view to_string(LatentDim d) {
  return d == LatentDim::Gdp ? "gdp" : "pop";
}

int Panel::item_index(int item_id) const {
  for (std::size_t j = 0; j < items_.size(); ++j)
    if (items_[j].item_id == item_id) return static_cast<int>(j);
  return -1;
}

int Panel::country_index(std::string_view country) const {
  auto it = std::lower_bound(countries_.begin(), countries_.end(), country);
  if (it == countries_.end() || *it != country) return -1;
  return static_cast<int>(it - countries_.begin());
}

std::size_t Panel::num_observed() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1));
}

Panel Panel::with_item_specs(std::vector<ItemSpec> specs) const {
  if (specs.size() != items_.size())
    throw InputError("item spec replacement changes the number of items");
  for (std::size_t j = 0; j < specs.size(); ++j)
    if (specs[j].item_id != items_[j].item_id)
      throw InputError(fmt::format("item spec replacement reorders item {}", items_[j].item_id));
  Panel out = *this;
  out.items_ = std::move(specs);
  return out;
}

Panel Panel::with_extra_items(std::span<const ItemSpec> extra) const {
  Panel out;
  out.countries_ = countries_;
  out.first_year_ = first_year_;
  out.num_years_ = num_years_;
  out.offset_ = offset_;
  out.num_cells_ = num_cells_;
  out.items_ = items_;
  for (const auto& spec : extra) {
    if (item_index(spec.item_id) >= 0)
      throw InputError(fmt::format("item {} already present", spec.item_id));
    if (!out.items_.empty() && spec.item_id < out.items_.back().item_id)
      throw InputError("extra items must have ids above the existing ones");
    out.items_.push_back(spec);
  }
  const std::size_t old_j = items_.size();
  const std::size_t new_j = out.items_.size();
  out.values_.assign(num_cells_ * new_j, 0.0);
  out.mask_.assign(num_cells_ * new_j, 0);
  for (std::size_t cell = 0; cell < num_cells_; ++cell) {
    for (std::size_t j = 0; j < old_j; ++j) {
      out.values_[cell * new_j + j] = values_[cell * old_j + j];
      out.mask_[cell * new_j + j] = mask_[cell * old_j + j];
    }
  }
  return out;
}

Panel Panel::with_mask(std::vector<unsigned char> mask) const {
  if (mask.size() != mask_.size()) throw InputError("mask shape mismatch");
  Panel out = *this;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (mask[k] && !mask_[k]) throw InputError("mask may only remove observations");
    if (!mask[k]) out.values_[k] = 0.0;
  }
  out.mask_ = std::move(mask);
  return out;
}

Panel build_panel(std::span<const Observation> observations,
                  std::span<const ItemSpec> item_specs) {
  Panel panel;
  panel.items_.assign(item_specs.begin(), item_specs.end());
  std::sort(panel.items_.begin(), panel.items_.end(),
            [](const ItemSpec& a, const ItemSpec& b) { return a.item_id < b.item_id; });
  for (std::size_t j = 1; j < panel.items_.size(); ++j)
    if (panel.items_[j].item_id == panel.items_[j - 1].item_id)
      throw InputError(fmt::format("item id {} specified twice", panel.items_[j].item_id));

  std::map<std::string, std::pair<int, int>> ranges;
  std::set<std::tuple<std::string, int, int>> seen;
  for (const auto& obs : observations) {
    if (!std::isfinite(obs.value))
      throw InputError(fmt::format("non-finite value at ({}, {}, {})", obs.country, obs.year,
                                   obs.item_id));
    if (panel.item_index(obs.item_id) < 0)
      throw InputError(fmt::format("item {} at ({}, {}) has no item spec", obs.item_id,
                                   obs.country, obs.year));
    if (!seen.emplace(obs.country, obs.year, obs.item_id).second)
      throw InputError(fmt::format("duplicate observation ({}, {}, {})", obs.country, obs.year,
                                   obs.item_id));
    auto [it, inserted] = ranges.try_emplace(obs.country, obs.year, obs.year);
    if (!inserted) {
      it->second.first = std::min(it->second.first, obs.year);
      it->second.second = std::max(it->second.second, obs.year);
    }
  }

  for (const auto& [country, range] : ranges) {
    panel.countries_.push_back(country);
    panel.first_year_.push_back(range.first);
    panel.num_years_.push_back(static_cast<std::size_t>(range.second - range.first + 1));
    panel.offset_.push_back(panel.num_cells_);
    panel.num_cells_ += panel.num_years_.back();
  }

  const std::size_t nj = panel.items_.size();
  panel.values_.assign(panel.num_cells_ * nj, 0.0);
  panel.mask_.assign(panel.num_cells_ * nj, 0);
  for (const auto& obs : observations) {
    const auto c = static_cast<std::size_t>(panel.country_index(obs.country));
    const auto t = static_cast<std::size_t>(obs.year - panel.first_year_[c]);
    const auto slot = panel.cell(c, t) * nj + static_cast<std::size_t>(panel.item_index(obs.item_id));
    panel.values_[slot] = obs.value;
    panel.mask_[slot] = 1;
  }
  return panel;
}

std::vector<int> item_counts(const Panel& panel) {
  std::vector<int> counts(panel.num_cells(), 0);
  for (std::size_t cell = 0; cell < panel.num_cells(); ++cell)
    for (std::size_t j = 0; j < panel.num_items(); ++j)
      counts[cell] += panel.observed(cell, j) ? 1 : 0;
  return counts;
}

std::vector<Observation> flatten(const Panel& panel) {
  std::vector<Observation> out;
  for (std::size_t c = 0; c < panel.num_countries(); ++c) {
    for (std::size_t t = 0; t < panel.num_years(c); ++t) {
      const auto cell = panel.cell(c, t);
      for (std::size_t j = 0; j < panel.num_items(); ++j) {
        if (!panel.observed(cell, j)) continue;
        out.push_back({panel.countries()[c], panel.first_year(c) + static_cast<int>(t),
                       panel.item(j).item_id, panel.value(cell, j)});
      }
    }
  }
  return out;
}

}  // namespace lgdp
