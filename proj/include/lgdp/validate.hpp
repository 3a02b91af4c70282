#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lgdp/draw_store.hpp"
#include "lgdp/panel.hpp"
#include "lgdp/posterior.hpp"

namespace lgdp {

struct ZScoreRow {
  std::string country;
  int year = 0;
  int item_id = 0;
  std::string item_name;
  Dimension dimension = Dimension::Gdp;
  std::size_t cell = 0;
  std::size_t item = 0;
  /// Observed items in the cell, this one included.
  int item_count = 0;
  /// Other observed items of the same dimension in the cell.
  int co_observed = 0;
  double observed = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  double z = 0.0;
  /// sd = 0 (or no predictive draws): z is undefined and the row is left out
  /// of every aggregate.
  bool flagged = false;
};

struct ZScoreTable {
  std::vector<ZScoreRow> rows;
};

/// z = (y - E(y~)) / sd(y~) for every observed cell with a defined predictive
/// distribution. The summary must come from a store on the panel's layout.
ZScoreTable zscores(const Panel& panel, const PosteriorSummary& summary);

struct ZGroup {
  std::string key;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
};

/// Mean and sd of unflagged z values grouped by item id.
std::vector<ZGroup> zscores_by_item(const ZScoreTable& table);
/// Same, grouped by the number of observed items in the cell.
std::vector<ZGroup> zscores_by_item_count(const ZScoreTable& table);

struct CoverageRow {
  int item_id = 0;  // 0 on the weighted row
  std::string name;
  std::size_t n = 0;
  double within1 = 0.0;
  double within2 = 0.0;
  double within3 = 0.0;
};

struct CoverageTable {
  std::vector<CoverageRow> items;
  CoverageRow weighted;
};

/// Share of unflagged |z| within 1, 2, 3 per item, plus the
/// observation-weighted row. Throws InputError when no row is usable.
CoverageTable coverage(const ZScoreTable& table);

struct RmseRow {
  int item_id = 0;
  std::string name;
  std::size_t cells = 0;
  std::size_t draws = 0;
  /// RMSE(primary) - RMSE(secondary), averaged over draw pairs.
  double diff = 0.0;
  /// Equal-tailed 95% interval of the per-draw difference.
  double lower = 0.0;
  double upper = 0.0;
  /// Pr(diff < 0), ties counted half.
  double prob_primary_better = 0.0;
};

/// Per-draw RMSE of predictive draws against observed values, over the cells
/// of each target item observed in `panel`. Draw d of the primary store is
/// paired with draw d (chain-major order) of the secondary store; the
/// shorter store sets the number of pairs. Both stores must contain every
/// target cell; otherwise StoreError lists the missing coordinates. An empty
/// target list means every item of the panel.
std::vector<RmseRow> rmse_compare(const DrawStore& primary, const DrawStore& secondary,
                                  const Panel& panel, std::span<const int> target_items = {});

/// Per-draw RMSE helper shared with rmse_compare: result[item][draw].
std::vector<std::vector<double>> rmse_draws(const DrawStore& store, const Panel& panel,
                                            std::span<const int> item_ids);

struct CorrelationMatrix {
  /// y.<id>, yhat.<id>, theta.gdp, theta.pop, theta.gdppc.
  std::vector<std::string> variables;
  /// Row-major; nullopt where fewer than two overlapping units exist or a
  /// variable is constant over the overlap.
  std::vector<std::optional<double>> r;
  std::vector<std::size_t> overlap;

  std::optional<double> at(std::size_t a, std::size_t b) const { return r[a * variables.size() + b]; }
};

/// Pearson correlations over overlapping country-years. Observed items use
/// their observed cells; predicted items and latents use posterior means at
/// every defined cell.
CorrelationMatrix correlation_matrix(const Panel& panel, const PosteriorSummary& summary);

struct ProfileRow {
  std::string group;  // latent name or item id
  int bucket = 0;     // item count or co-observed count
  std::size_t n = 0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

/// Latent posterior sd per country-year (gdp, pop, gdppc) bucketed by the
/// number of observed items in the cell.
std::vector<ProfileRow> uncertainty_profile(const Panel& panel, const PosteriorSummary& summary);

inline constexpr int kMaxCoObserved = 4;

/// z distribution per item, bucketed by the number of other observed items
/// of the same dimension in the cell (+0 .. +4, higher counts folded into +4).
std::vector<ProfileRow> item_bias_profile(const ZScoreTable& table, const Panel& panel);

void write_zscores(const std::filesystem::path& path, const ZScoreTable& table);
void write_zgroups(const std::filesystem::path& path, std::string_view key_name,
                   std::span<const ZGroup> groups);
void write_coverage(const std::filesystem::path& path, const CoverageTable& table);
void write_rmse(const std::filesystem::path& path, std::span<const RmseRow> rows);
void write_correlation(const std::filesystem::path& matrix_path,
                       const std::filesystem::path& long_path, const CorrelationMatrix& m);
void write_profile(const std::filesystem::path& path, std::string_view group_name,
                   std::string_view bucket_name, std::span<const ProfileRow> rows);

}  // namespace lgdp
