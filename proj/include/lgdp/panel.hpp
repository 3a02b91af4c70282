#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lgdp {

/// Which latent concept an item measures. GDPPC and GROWTH are never free
/// latents; they are deterministic functions of the GDP/POP trajectories.
enum class Dimension { Gdp = 0, Pop = 1, Gdppc = 2, Growth = 3 };

/// The two free latent trajectories.
enum class LatentDim { Gdp = 0, Pop = 1 };

inline constexpr int kNumDimensions = 4;

std::string_view to_string(Dimension d);
Dimension parse_dimension(std::string_view text);
std::string_view to_string(LatentDim d);

/// Metadata for one component series.
struct ItemSpec {
  int item_id = 0;
  std::string name;
  Dimension dimension = Dimension::Gdp;
  /// Prior center for the item's intercept, in the item's log units.
  double intercept_anchor = 0.0;
  std::string unit_note;
  /// Identification item (Maddison GDP / population in the default catalog).
  bool identification = false;
  /// Intercept held at intercept_anchor instead of sampled.
  bool fixed_intercept = false;
};

struct Observation {
  std::string country;
  int year = 0;
  int item_id = 0;
  double value = 0.0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Coordinates of a free latent value.
struct LatentIndex {
  std::size_t country = 0;
  std::size_t year = 0;  // offset from the country's first year
  LatentDim dimension = LatentDim::Gdp;
};

/// Country x year x item observation tensor in natural-log units.
///
/// Each country covers a contiguous range of years starting at its first
/// observed year. Country-years are stored back to back ("cells"), so the
/// latent trajectories and the per-item tensors share one flat index:
///   cell(c, t) = offset(c) + t,   slot(cell, j) = cell * num_items + j.
/// Immutable after construction.
class Panel {
 public:
  Panel() = default;

  std::size_t num_countries() const { return countries_.size(); }
  std::size_t num_items() const { return items_.size(); }
  std::size_t num_cells() const { return num_cells_; }

  const std::vector<std::string>& countries() const { return countries_; }
  const std::vector<ItemSpec>& items() const { return items_; }
  const ItemSpec& item(std::size_t j) const { return items_[j]; }
  /// Position of item_id in items(), or -1.
  int item_index(int item_id) const;
  /// Position of the country in countries(), or -1.
  int country_index(std::string_view country) const;

  int first_year(std::size_t c) const { return first_year_[c]; }
  std::size_t num_years(std::size_t c) const { return num_years_[c]; }
  std::size_t offset(std::size_t c) const { return offset_[c]; }
  std::size_t cell(std::size_t c, std::size_t t) const { return offset_[c] + t; }

  bool observed(std::size_t cell, std::size_t j) const {
    return mask_[cell * items_.size() + j] != 0;
  }
  double value(std::size_t cell, std::size_t j) const {
    return values_[cell * items_.size() + j];
  }

  std::size_t num_observed() const;

  /// Same layout and data with replacement item metadata (anchors, flags).
  /// The new specs must describe the same item ids in the same order.
  Panel with_item_specs(std::vector<ItemSpec> specs) const;

  /// Appends items with no observations.
  Panel with_extra_items(std::span<const ItemSpec> extra) const;

  /// Same layout with a replacement observation mask; masked-out values are zeroed.
  Panel with_mask(std::vector<unsigned char> mask) const;

  const std::vector<unsigned char>& mask() const { return mask_; }
  const std::vector<double>& values() const { return values_; }

  friend Panel build_panel(std::span<const Observation>, std::span<const ItemSpec>);

 private:
  std::vector<std::string> countries_;
  std::vector<int> first_year_;
  std::vector<std::size_t> num_years_;
  std::vector<std::size_t> offset_;
  std::size_t num_cells_ = 0;
  std::vector<ItemSpec> items_;
  std::vector<double> values_;
  std::vector<unsigned char> mask_;
};

/// Builds the rectangularized panel. Countries are sorted lexicographically
/// and items are sorted by item_id. Throws InputError on duplicate
/// (country, year, item) triples, non-finite values, or unknown item ids.
Panel build_panel(std::span<const Observation> observations,
                  std::span<const ItemSpec> item_specs);

/// Number of observed items per cell (flat cell index).
std::vector<int> item_counts(const Panel& panel);

/// Observed triples in layout order.
std::vector<Observation> flatten(const Panel& panel);

}  // namespace lgdp
