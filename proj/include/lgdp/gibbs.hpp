#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lgdp/config.hpp"
#include "lgdp/model.hpp"
#include "lgdp/rng.hpp"

namespace lgdp {

/// Priors of the measurement model.
///   theta at a country's first year ~ N(initial_mean, initial_variance)
///   theta_t | theta_{t-1} ~ N(theta_{t-1}, sigma_k), sigma_k ~ U(0, sigma_upper)
///   tau_k ~ Gamma(tau_shape, tau_rate)
///   alpha_j ~ N(anchor_j, intercept_variance); slopes fixed at 1
struct PriorConfig {
  double initial_mean = 0.0;
  double initial_variance = 1.0;
  double sigma_upper = 1.0;
  double tau_shape = 0.001;
  double tau_rate = 0.001;
  /// 0.25 treats a spread of 4 as a precision; 4.0 treats it as a variance.
  double intercept_variance = 0.25;

  static PriorConfig from_config(const Config& cfg);
  void validate() const;
};

enum class Schedule { SingleSite, BlockedFfbs };

Schedule parse_schedule(std::string_view text);
std::string_view to_string(Schedule s);

/// Parameters held at given values instead of sampled.
struct FixedValues {
  std::optional<std::array<double, 2>> sigma;
  std::optional<std::vector<double>> tau;
  std::optional<std::vector<double>> alpha;
};

struct SamplerPlan {
  int n_chains = 5;
  long long n_iterations = 100000;
  long long n_burnin = 50000;
  long long thinning = 1;
  std::uint64_t seed = 1;
  Schedule schedule = Schedule::SingleSite;
  /// Worker threads for chains; 0 = hardware concurrency. Never changes results.
  int threads = 0;
  /// Joint translation of each latent dimension against its intercepts
  /// (see update_level_shifts).
  bool level_moves = true;
  FixedValues fixed;

  long long retained_per_chain() const {
    return (n_iterations - n_burnin + thinning - 1) / thinning;
  }
  static SamplerPlan from_config(const Config& cfg);
  void validate() const;
};

/// Per-chain random streams. Each group of sites draws from its own
/// substream so that adding an unobserved item or a country never shifts
/// the draws of existing sites.
struct ChainRng {
  std::uint64_t seed = 0;
  int chain = 0;
  std::vector<Engine> latent;  // per country
  std::vector<Engine> alpha;   // per item
  std::vector<Engine> tau;     // per precision category
  std::array<Engine, 2> sigma;
  std::array<Engine, 2> shift;  // level moves per latent dimension

  /// Predictive draws for one country at one iteration.
  Engine predictive(std::size_t country, long long iteration) const {
    return make_engine(seed, {static_cast<std::uint64_t>(chain), 5, country,
                              static_cast<std::uint64_t>(iteration)});
  }
};

struct ChainState {
  std::vector<double> theta_gdp;  // panel cell layout
  std::vector<double> theta_pop;
  std::vector<double> alpha;  // per item
  std::vector<double> tau;    // per category: gdp, pop, gdppc[, growth]
  /// Innovation variances of the GDP and POP walks, in (0, sigma_upper).
  std::array<double, 2> sigma{0.5, 0.5};
  ChainRng rng;

  std::vector<double>& theta(LatentDim d) { return d == LatentDim::Gdp ? theta_gdp : theta_pop; }
  const std::vector<double>& theta(LatentDim d) const {
    return d == LatentDim::Gdp ? theta_gdp : theta_pop;
  }
};

/// Starting state: latents at 0, intercepts at anchor plus a prior-scale
/// jitter, precisions at 1, innovation variances from their prior. Fixed
/// values from the plan override.
ChainState init_chain(const Model& model, const PriorConfig& prior, const SamplerPlan& plan,
                      int chain);

struct GaussianConditional {
  double mean = 0.0;
  double precision = 0.0;
  double variance() const { return 1.0 / precision; }
};

/// Gaussian part of a latent's full conditional: walk prior plus every
/// usable observation whose link is linear in this latent.
/// `nonlinear` reports whether usable nonlinear-link observations also
/// touch it (their terms are not included).
GaussianConditional latent_conditional(const ChainState& state, const Model& model,
                                       const PriorConfig& prior, std::size_t country,
                                       std::size_t year, LatentDim dim, bool* nonlinear = nullptr);

GaussianConditional intercept_conditional(const ChainState& state, const Model& model,
                                          const PriorConfig& prior, std::size_t item);

struct GammaConditional {
  double shape = 0.0;
  double rate = 0.0;
  std::size_t count = 0;
  double ssr = 0.0;
};
GammaConditional precision_conditional(const ChainState& state, const Model& model,
                                       const PriorConfig& prior, int category);

struct InnovationConditional {
  std::size_t increments = 0;
  double sum_sq = 0.0;
};
InnovationConditional innovation_conditional(const ChainState& state, const Model& model,
                                             LatentDim dim);

/// Draws sigma with density proportional to
///   sigma^(-m/2) exp(-S / (2 sigma)) on (0, upper),
/// i.e. an inverse gamma (m/2 - 1, S/2) truncated to (0, upper), by
/// inverting the truncated CDF. Falls back to slice sampling from `current`
/// when the inversion is ill-conditioned or the shape is not positive.
/// m == 0 or S == 0 draws from the U(0, upper) prior.
double sample_innovation_variance(Engine& eng, std::size_t m, double sum_sq, double upper,
                                  double current);

/// Joint draw of x ~ N(Q^{-1} b, Q^{-1}) for symmetric tridiagonal Q given by
/// its diagonal and first off-diagonal (off[t] couples t and t+1). This is
/// forward filtering / backward sampling in information form. Throws
/// InternalError if Q is not positive definite.
void sample_tridiagonal(std::span<const double> diag, std::span<const double> off,
                        std::span<const double> b, Engine& eng, std::span<double> out);

void update_latents(ChainState& state, const Model& model, const PriorConfig& prior,
                    Schedule schedule);
void update_intercepts(ChainState& state, const Model& model, const PriorConfig& prior);
void update_precisions(ChainState& state, const Model& model, const PriorConfig& prior);
void update_innovations(ChainState& state, const Model& model, const PriorConfig& prior);

/// Per-item coefficient of a level shift of `dim`: shifting every latent of
/// `dim` by delta and each intercept by -coefficient * delta leaves every
/// usable emission mean unchanged. Items without usable observations get 0.
/// Returns nullopt when no such compensation exists (an observed link that
/// is not translation-equivariant in `dim`, or a fixed compensating
/// intercept).
std::optional<std::vector<double>> level_shift_coefficients(const Model& model, LatentDim dim,
                                                            bool intercepts_fixed);

/// Gibbs draw along the translation orbit of each latent dimension. The
/// likelihood is constant along it, so the shift's conditional is the
/// Gaussian formed by the first-year latent priors and the intercept priors.
void update_level_shifts(ChainState& state, const Model& model, const PriorConfig& prior,
                         bool intercepts_fixed);

/// One full sweep honoring the plan's fixed values.
void gibbs_sweep(ChainState& state, const Model& model, const PriorConfig& prior,
                 const SamplerPlan& plan);

/// Derived GDPPC latent for every cell, using the model's GDPPC form.
std::vector<double> derived_gdppc_series(const ChainState& state, const Model& model);

/// Value of derived series `index` for every cell; NaN where a lag is unavailable.
std::vector<double> derived_link_series(const ChainState& state, const Model& model,
                                        std::size_t index);

/// y~ ~ N(alpha_j + link_j(theta), 1/tau_k) for every (cell, item), slot
/// layout cell * J + j; NaN where the link is undefined. Uses the chain's
/// predictive substream for `iteration`.
void draw_predictive(const ChainState& state, const Model& model, long long iteration,
                     std::span<double> out);

/// Throws InternalError naming the offending parameter if the state holds
/// non-finite values or out-of-support scales.
void check_state(const ChainState& state, int chain, long long iteration);

}  // namespace lgdp
