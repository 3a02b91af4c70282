#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lgdp/draw_store.hpp"
#include "lgdp/panel.hpp"

namespace lgdp {

inline constexpr std::array<double, 5> kQuantileProbs{0.025, 0.16, 0.5, 0.84, 0.975};

struct ElementSummary {
  double mean = 0.0;
  double sd = 0.0;
  /// At kQuantileProbs.
  std::array<double, 5> quantiles{};
  std::size_t n_draws = 0;
  std::vector<double> chain_means;

  bool defined() const { return n_draws > 0; }
};

/// Linear interpolation between order statistics: with h = (n - 1) p,
/// q = x[floor(h)] + (h - floor(h)) (x[floor(h) + 1] - x[floor(h)]).
double quantile_sorted(std::span<const double> sorted, double p);

/// Statistics of draws laid out chain-major (chain 0's draws first).
/// Non-finite draws are skipped; an element with no finite draws is
/// reported with n_draws = 0 and NaN statistics. Throws InputError for an
/// empty span.
ElementSummary summarize_values(std::span<const double> draws, int chains);

struct PosteriorSummary {
  StoreLayout layout;
  int chains = 0;
  long long draws_per_chain = 0;
  std::map<std::string, std::vector<ElementSummary>> params;

  const std::vector<ElementSummary>& at(std::string_view name) const;
  bool has(std::string_view name) const { return params.find(std::string(name)) != params.end(); }
};

/// Streams every parameter of the store in element blocks.
PosteriorSummary summarize(const DrawStore& store);

/// Classic between/within variance ratio, sqrt(var_plus / W). Needs at
/// least two chains of two draws each.
double potential_scale_reduction(std::span<const double> draws, int chains);

/// Effective sample size from the multi-chain autocorrelation estimate,
/// summing autocorrelation pairs until the first negative pair sum. Capped
/// at the number of draws.
double effective_sample_size(std::span<const double> draws, int chains);

struct ParamDiagnostic {
  std::string param;
  std::size_t element = 0;
  double psr = 1.0;
  double ess = 0.0;
};

struct ConvergenceReport {
  int chains = 0;
  long long draws_per_chain = 0;
  /// False with a single chain; psr fields are then NaN.
  bool psr_available = false;
  std::vector<ParamDiagnostic> entries;
  double max_psr = 0.0;
  std::string max_psr_param;
  double min_ess = 0.0;
  std::string min_ess_param;

  bool converged(double psr_threshold = 1.1) const {
    return psr_available && max_psr <= psr_threshold;
  }
};

/// PSR and ESS for every scalar model parameter (alpha, tau, sigma, the
/// latents and derived latents). Predictive draws are included only on
/// request.
ConvergenceReport diagnose(const DrawStore& store, bool include_predictive = false);

void write_convergence_report(const std::filesystem::path& path, const ConvergenceReport& report);

inline const std::string kEstimateHeader =
    "record,country,year,item_id,name,dimension,observed,observed_value,mean,sd,"
    "q2.5,q16,q50,q84,q97.5";

/// One row per defined country-year-item predictive cell and one row per
/// country-year per latent (gdp, pop, gdppc, then registered growth latents).
/// Requires a summary produced on the same panel layout.
void export_estimates(const PosteriorSummary& summary, const Panel& panel,
                      const std::filesystem::path& path);

}  // namespace lgdp
