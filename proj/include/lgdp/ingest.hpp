#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lgdp/config.hpp"
#include "lgdp/panel.hpp"

namespace lgdp {

/// One row of a component-series file.
struct SourceRecord {
  std::string country;
  int year = 0;
  int item_id = 0;
  /// Original units before log_transform, natural log after.
  double value = 0.0;
  std::optional<std::string> origin_code;
  bool logged = false;

  friend bool operator==(const SourceRecord&, const SourceRecord&) = default;
};

/// Column layout of the delimited input. The header row is mandatory and
/// must name every column; column order is free.
struct RecordFormat {
  char delimiter = ',';
  std::string country_column = "country_id";
  std::string year_column = "year";
  std::string item_column = "item_id";
  std::string value_column = "value";
  std::string origin_column = "origin_code";
};

inline const std::string kRecordHeader = "country_id,year,item_id,value,origin_code";

std::vector<SourceRecord> load_records(const std::filesystem::path& path,
                                       const RecordFormat& format = {});
std::vector<SourceRecord> parse_records(std::string_view text, const RecordFormat& format = {},
                                        std::string_view origin = "<string>");
void write_records(const std::filesystem::path& path, std::span<const SourceRecord> records);

struct ItemFilter {
  /// Non-empty: keep only records whose origin code is listed (records
  /// without a code are dropped).
  std::set<std::string> retained_codes;
  std::set<std::string> excluded_codes;
  std::optional<int> min_year;
};

struct FilterPolicy {
  int min_year = 1500;
  int max_year = 2015;
  std::map<int, ItemFilter> per_item;

  /// Source-specific rules: Gleditsch items keep origin codes
  /// {0, -1, 3} and drop {-2, 1, 2}; COW population keeps quality code A;
  /// nothing before 1500.
  static FilterPolicy source_defaults();
  /// source_defaults() (dropped when filter.source_defaults = false)
  /// overridden by `filter.*` keys.
  static FilterPolicy from_config(const Config& cfg);
};

std::vector<SourceRecord> apply_filters(std::span<const SourceRecord> records,
                                        const FilterPolicy& policy);

/// Natural log of every value. Throws InputError on a non-positive value.
std::vector<SourceRecord> log_transform(std::span<const SourceRecord> records);

/// Logged records to panel observations.
std::vector<Observation> to_observations(std::span<const SourceRecord> records);

/// The sixteen component series of the default configuration:
/// items 1-5 GDP, 6-10 population, 11-16 GDP per capita.
std::vector<ItemSpec> default_item_catalog();

/// Catalog with `item.<id>.*` overrides (name, dimension, anchor,
/// identification, fixed, unit) and any extra items declared in the config.
std::vector<ItemSpec> item_catalog_from_config(const Config& cfg);

struct AnchorPolicy {
  std::map<int, double> explicit_anchors;
  /// Hold identification items' intercepts at their anchors.
  bool fix_identification = false;
};

/// Sets each item's intercept anchor to the explicit anchor if given, else
/// to the empirical mean of its observed values. Throws InputError for an
/// item with no observations and no explicit anchor.
std::vector<ItemSpec> compute_anchors(const Panel& panel, const AnchorPolicy& policy);

AnchorPolicy anchor_policy_from_config(const Config& cfg);

/// Generative settings for synthetic panels.
struct GenerativeConfig {
  std::size_t countries = 5;
  std::size_t years = 100;
  int first_year = 1900;
  /// Items with intercept_anchor = generative intercept center.
  std::vector<ItemSpec> items = default_item_catalog_with_centers();
  /// Innovation variances of the GDP and POP random walks.
  double sigma_gdp = 0.0004;
  double sigma_pop = 0.0004;
  /// Emission precisions for GDP, POP, GDPPC items.
  double tau_gdp = 25.0;
  double tau_pop = 25.0;
  double tau_gdppc = 25.0;
  double missing_rate = 0.2;
  double initial_variance = 1.0;
  /// Draw each intercept from N(center, intercept_variance) instead of
  /// using the center itself.
  bool jitter_intercepts = true;
  double intercept_variance = 0.25;

  static std::vector<ItemSpec> default_item_catalog_with_centers();
  static GenerativeConfig from_config(const Config& cfg);
  void validate() const;
};

struct TrueParams {
  std::vector<double> theta_gdp;  // panel cell layout
  std::vector<double> theta_pop;
  std::vector<double> alpha;
  std::vector<double> tau;
  double sigma_gdp = 0.0;
  double sigma_pop = 0.0;
};

struct SimulatedPanel {
  Panel panel;
  TrueParams truth;
  /// Every generated value, observed or not, in panel slot layout.
  std::vector<double> complete_values;
};

/// Draws a panel from the model's generative process. Every country spans
/// the same years; masked cells keep their generated value in
/// complete_values. Deterministic in (config, seed).
SimulatedPanel simulate_panel(const GenerativeConfig& config, std::uint64_t seed);

void write_true_params(const std::filesystem::path& path, const SimulatedPanel& sim);

}  // namespace lgdp
