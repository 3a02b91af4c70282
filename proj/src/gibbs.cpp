#include "lgdp/gibbs.hpp"

#include <cmath>
#include <limits>

#include <boost/math/policies/policy.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "lgdp/error.hpp"
#include "lgdp/slice.hpp"

namespace lgdp {

namespace {

constexpr double kMinPrecision = 1e-12;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using QuietPolicy = boost::math::policies::policy<
    boost::math::policies::domain_error<boost::math::policies::errno_on_error>,
    boost::math::policies::overflow_error<boost::math::policies::errno_on_error>,
    boost::math::policies::underflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::evaluation_error<boost::math::policies::errno_on_error>>;

std::size_t dim_index(LatentDim d) { return static_cast<std::size_t>(d); }

// Calls f(item, year, input) for every usable observation whose link reads
// latent (country, year, dim).
template <class F>
void for_each_touching(const Model& model, std::size_t c, std::size_t t, LatentDim dim, F&& f) {
  const auto& panel = model.panel();
  const std::size_t years = panel.num_years(c);
  for (std::size_t j = 0; j < panel.num_items(); ++j) {
    const auto& link = model.link(j);
    for (std::size_t k = 0; k < link.inputs.size(); ++k) {
      const auto& in = link.inputs[k];
      if (in.dim != dim) continue;
      const std::size_t tp = t + static_cast<std::size_t>(in.lag);
      if (tp >= years || !model.usable(c, tp, j)) continue;
      f(j, tp, k);
    }
  }
}

double residual(const ChainState& s, const Model& model, std::size_t j, std::size_t c,
                std::size_t t) {
  const auto& panel = model.panel();
  return panel.value(panel.cell(c, t), j) - s.alpha[j] -
         model.link_value(j, c, t, s.theta_gdp, s.theta_pop);
}

bool trajectory_blockable(const ChainState& s, const Model& model, std::size_t c, LatentDim dim) {
  const auto& panel = model.panel();
  for (std::size_t j = 0; j < panel.num_items(); ++j) {
    const auto& link = model.link(j);
    int lo = std::numeric_limits<int>::max();
    int hi = std::numeric_limits<int>::min();
    for (const auto& in : link.inputs) {
      if (in.dim != dim) continue;
      lo = std::min(lo, in.lag);
      hi = std::max(hi, in.lag);
    }
    if (lo > hi) continue;  // item does not read this dimension
    bool any_obs = false;
    for (std::size_t t = 0; t < panel.num_years(c) && !any_obs; ++t) any_obs = model.usable(c, t, j);
    if (!any_obs) continue;
    if (!link.linear() || hi - lo > 1) return false;
  }
  (void)s;
  return true;
}

void update_site(ChainState& s, const Model& model, const PriorConfig& prior, std::size_t c,
                 std::size_t t, LatentDim dim, Engine& eng) {
  bool nonlinear = false;
  const auto cond = latent_conditional(s, model, prior, c, t, dim, &nonlinear);
  auto& theta = s.theta(dim);
  const auto cell = model.panel().cell(c, t);
  if (!nonlinear) {
    theta[cell] = cond.mean + draw_normal(eng) / std::sqrt(cond.precision);
    return;
  }
  const auto& panel = model.panel();
  auto log_density = [&](double x) {
    theta[cell] = x;
    double lp = -0.5 * cond.precision * (x - cond.mean) * (x - cond.mean);
    for_each_touching(model, c, t, dim, [&](std::size_t j, std::size_t tp, std::size_t) {
      if (model.link(j).linear()) return;
      const double r = residual(s, model, j, c, tp);
      lp -= 0.5 * s.tau[static_cast<std::size_t>(model.category(j))] * r * r;
    });
    return std::isfinite(lp) ? lp : -std::numeric_limits<double>::infinity();
  };
  (void)panel;
  const double x0 = theta[cell];
  theta[cell] = slice_sample(eng, log_density, x0, 1.0 / std::sqrt(cond.precision));
}

void update_trajectory(ChainState& s, const Model& model, const PriorConfig& prior,
                       std::size_t c, LatentDim dim, Engine& eng) {
  const auto& panel = model.panel();
  const std::size_t years = panel.num_years(c);
  const double w = 1.0 / s.sigma[dim_index(dim)];
  std::vector<double> diag(years, 0.0), off(years > 0 ? years - 1 : 0, 0.0), b(years, 0.0);
  for (std::size_t t = 0; t < years; ++t) {
    diag[t] += t == 0 ? 1.0 / prior.initial_variance : w;
    if (t + 1 < years) {
      diag[t] += w;
      off[t] = -w;
    }
  }
  b[0] += prior.initial_mean / prior.initial_variance;

  const auto& other = s.theta(dim == LatentDim::Gdp ? LatentDim::Pop : LatentDim::Gdp);
  for (std::size_t j = 0; j < panel.num_items(); ++j) {
    const auto& link = model.link(j);
    bool reads = false;
    for (const auto& in : link.inputs) reads = reads || in.dim == dim;
    if (!reads) continue;
    const double tau = s.tau[static_cast<std::size_t>(model.category(j))];
    for (std::size_t tp = 0; tp < years; ++tp) {
      if (!model.usable(c, tp, j)) continue;
      double r = panel.value(panel.cell(c, tp), j) - s.alpha[j];
      std::size_t idx[2];
      double coef[2];
      std::size_t n_own = 0;
      for (std::size_t k = 0; k < link.inputs.size(); ++k) {
        const auto& in = link.inputs[k];
        const auto at = tp - static_cast<std::size_t>(in.lag);
        if (in.dim == dim) {
          idx[n_own] = at;
          coef[n_own] = link.coefficient(k);
          ++n_own;
        } else {
          r -= link.coefficient(k) * other[panel.cell(c, at)];
        }
      }
      for (std::size_t a = 0; a < n_own; ++a) {
        b[idx[a]] += tau * coef[a] * r;
        diag[idx[a]] += tau * coef[a] * coef[a];
        for (std::size_t bb = a + 1; bb < n_own; ++bb) {
          const auto lo = std::min(idx[a], idx[bb]);
          off[lo] += tau * coef[a] * coef[bb];
        }
      }
    }
  }
  std::vector<double> draw(years);
  sample_tridiagonal(diag, off, b, eng, draw);
  auto& theta = s.theta(dim);
  for (std::size_t t = 0; t < years; ++t) theta[panel.cell(c, t)] = draw[t];
}

}  // namespace

PriorConfig PriorConfig::from_config(const Config& cfg) {
  PriorConfig p;
  p.initial_mean = cfg.get_double("prior.initial_mean", p.initial_mean);
  p.initial_variance = cfg.get_double("prior.initial_variance", p.initial_variance);
  p.sigma_upper = cfg.get_double("prior.sigma_upper", p.sigma_upper);
  p.tau_shape = cfg.get_double("prior.tau_shape", p.tau_shape);
  p.tau_rate = cfg.get_double("prior.tau_rate", p.tau_rate);
  const auto spread = cfg.get_string("prior.intercept_spread", "precision");
  if (spread == "precision") {
    p.intercept_variance = 0.25;
  } else if (spread == "variance") {
    p.intercept_variance = 4.0;
  } else {
    throw InputError("prior.intercept_spread must be 'precision' or 'variance'");
  }
  p.intercept_variance = cfg.get_double("prior.intercept_variance", p.intercept_variance);
  p.validate();
  return p;
}

void PriorConfig::validate() const {
  if (!(initial_variance > 0.0)) throw InputError("prior.initial_variance must be positive");
  if (!(sigma_upper > 0.0)) throw InputError("prior.sigma_upper must be positive");
  if (!(tau_shape > 0.0) || !(tau_rate > 0.0))
    throw InputError("prior.tau_shape and prior.tau_rate must be positive");
  if (!(intercept_variance > 0.0)) throw InputError("prior.intercept_variance must be positive");
}

Schedule parse_schedule(std::string_view text) {
  if (text == "single-site") return Schedule::SingleSite;
  if (text == "blocked-ffbs") return Schedule::BlockedFfbs;
  throw InputError(fmt::format("unknown schedule '{}' (single-site | blocked-ffbs)", text));
}

std::string_view to_string(Schedule s) {
  return s == Schedule::SingleSite ? "single-site" : "blocked-ffbs";
}

SamplerPlan SamplerPlan::from_config(const Config& cfg) {
  SamplerPlan p;
  p.n_chains = static_cast<int>(cfg.get_int("chains", p.n_chains));
  p.n_iterations = cfg.get_int("iterations", p.n_iterations);
  p.n_burnin = cfg.get_int("burnin", p.n_burnin);
  p.thinning = cfg.get_int("thinning", p.thinning);
  const auto seed = cfg.get_int("seed", static_cast<long long>(p.seed));
  if (seed < 0) throw InputError("seed must be non-negative");
  p.seed = static_cast<std::uint64_t>(seed);
  p.schedule = parse_schedule(cfg.get_string("schedule", "single-site"));
  p.threads = static_cast<int>(cfg.get_int("threads", p.threads));
  p.level_moves = cfg.get_bool("level_moves", p.level_moves);
  if (auto v = cfg.get_doubles("fixed.sigma")) {
    if (v->size() != 2) throw InputError("fixed.sigma needs two values (gdp, pop)");
    p.fixed.sigma = std::array<double, 2>{(*v)[0], (*v)[1]};
  }
  if (auto v = cfg.get_doubles("fixed.tau")) p.fixed.tau = *v;
  if (auto v = cfg.get_doubles("fixed.alpha")) p.fixed.alpha = *v;
  p.validate();
  return p;
}

void SamplerPlan::validate() const {
  if (n_chains < 1) throw InputError("chains must be at least 1");
  if (n_iterations < 1) throw InputError("iterations must be at least 1");
  if (n_burnin < 0 || n_burnin >= n_iterations)
    throw InputError("burnin must be non-negative and below iterations");
  if (thinning < 1) throw InputError("thinning must be at least 1");
  if (threads < 0) throw InputError("threads must be non-negative");
  if (fixed.sigma)
    for (double v : *fixed.sigma)
      if (!(v > 0.0)) throw InputError("fixed.sigma values must be positive");
  if (fixed.tau)
    for (double v : *fixed.tau)
      if (!(v > 0.0)) throw InputError("fixed.tau values must be positive");
}

ChainState init_chain(const Model& model, const PriorConfig& prior, const SamplerPlan& plan,
                      int chain) {
  model.require_linked();
  const auto& panel = model.panel();
  const auto ch = static_cast<std::uint64_t>(chain);
  ChainState s;
  s.rng.seed = plan.seed;
  s.rng.chain = chain;
  for (std::size_t c = 0; c < panel.num_countries(); ++c)
    s.rng.latent.push_back(make_engine(plan.seed, {ch, 1, c}));
  for (const auto& item : panel.items())
    s.rng.alpha.push_back(make_engine(plan.seed, {ch, 2, static_cast<std::uint64_t>(item.item_id)}));
  for (int k = 0; k < model.num_categories(); ++k)
    s.rng.tau.push_back(make_engine(plan.seed, {ch, 3, static_cast<std::uint64_t>(k)}));
  s.rng.sigma = {make_engine(plan.seed, {ch, 4, 0}), make_engine(plan.seed, {ch, 4, 1})};
  s.rng.shift = {make_engine(plan.seed, {ch, 6, 0}), make_engine(plan.seed, {ch, 6, 1})};

  s.theta_gdp.assign(panel.num_cells(), 0.0);
  s.theta_pop.assign(panel.num_cells(), 0.0);
  s.alpha.resize(panel.num_items());
  for (std::size_t j = 0; j < panel.num_items(); ++j) {
    const auto& item = panel.item(j);
    const double jitter = std::sqrt(prior.intercept_variance) * draw_normal(s.rng.alpha[j]);
    s.alpha[j] = item.intercept_anchor + (item.fixed_intercept ? 0.0 : jitter);
  }
  s.tau.assign(static_cast<std::size_t>(model.num_categories()), 1.0);
  for (std::size_t d = 0; d < 2; ++d)
    s.sigma[d] = prior.sigma_upper * draw_open_uniform(s.rng.sigma[d]);

  if (plan.fixed.sigma) s.sigma = *plan.fixed.sigma;
  if (plan.fixed.tau) {
    if (plan.fixed.tau->size() != s.tau.size())
      throw InputError(fmt::format("fixed.tau needs {} values", s.tau.size()));
    s.tau = *plan.fixed.tau;
  }
  if (plan.fixed.alpha) {
    if (plan.fixed.alpha->size() != s.alpha.size())
      throw InputError(fmt::format("fixed.alpha needs {} values", s.alpha.size()));
    s.alpha = *plan.fixed.alpha;
  }
  return s;
}

GaussianConditional latent_conditional(const ChainState& s, const Model& model,
                                       const PriorConfig& prior, std::size_t c, std::size_t t,
                                       LatentDim dim, bool* nonlinear) {
  const auto& panel = model.panel();
  const auto& theta = s.theta(dim);
  const auto cell = panel.cell(c, t);
  const double w = 1.0 / s.sigma[dim_index(dim)];
  double precision = 0.0;
  double linear = 0.0;
  if (t == 0) {
    precision += 1.0 / prior.initial_variance;
    linear += prior.initial_mean / prior.initial_variance;
  } else {
    precision += w;
    linear += w * theta[cell - 1];
  }
  if (t + 1 < panel.num_years(c)) {
    precision += w;
    linear += w * theta[cell + 1];
  }
  bool any_nonlinear = false;
  for_each_touching(model, c, t, dim, [&](std::size_t j, std::size_t tp, std::size_t k) {
    const auto& link = model.link(j);
    if (!link.linear()) {
      any_nonlinear = true;
      return;
    }
    const double a = link.coefficient(k);
    const double tau = s.tau[static_cast<std::size_t>(model.category(j))];
    // Residual with this latent's own contribution added back.
    const double r = residual(s, model, j, c, tp) + a * theta[cell];
    precision += tau * a * a;
    linear += tau * a * r;
  });
  if (nonlinear) *nonlinear = any_nonlinear;
  if (!(precision >= kMinPrecision) || !std::isfinite(precision))
    throw InternalError(fmt::format("latent ({}, {}, {}) has conditional precision {}",
                                    panel.countries()[c], panel.first_year(c) + static_cast<int>(t),
                                    to_string(dim), precision));
  return {linear / precision, precision};
}

GaussianConditional intercept_conditional(const ChainState& s, const Model& model,
                                          const PriorConfig& prior, std::size_t j) {
  const auto& panel = model.panel();
  const double tau = s.tau[static_cast<std::size_t>(model.category(j))];
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < panel.num_countries(); ++c) {
    for (std::size_t t = 0; t < panel.num_years(c); ++t) {
      if (!model.usable(c, t, j)) continue;
      sum += panel.value(panel.cell(c, t), j) - model.link_value(j, c, t, s.theta_gdp, s.theta_pop);
      ++n;
    }
  }
  const double prior_precision = 1.0 / prior.intercept_variance;
  const double precision = prior_precision + static_cast<double>(n) * tau;
  const double mean = (prior_precision * panel.item(j).intercept_anchor + tau * sum) / precision;
  return {mean, precision};
}

GammaConditional precision_conditional(const ChainState& s, const Model& model,
                                       const PriorConfig& prior, int category) {
  const auto& panel = model.panel();
  GammaConditional g;
  for (std::size_t j = 0; j < panel.num_items(); ++j) {
    if (model.category(j) != category) continue;
    for (std::size_t c = 0; c < panel.num_countries(); ++c) {
      for (std::size_t t = 0; t < panel.num_years(c); ++t) {
        if (!model.usable(c, t, j)) continue;
        const double r = residual(s, model, j, c, t);
        g.ssr += r * r;
        ++g.count;
      }
    }
  }
  g.shape = prior.tau_shape + 0.5 * static_cast<double>(g.count);
  g.rate = prior.tau_rate + 0.5 * g.ssr;
  return g;
}

InnovationConditional innovation_conditional(const ChainState& s, const Model& model,
                                             LatentDim dim) {
  const auto& panel = model.panel();
  const auto& theta = s.theta(dim);
  InnovationConditional out;
  for (std::size_t c = 0; c < panel.num_countries(); ++c) {
    for (std::size_t t = 1; t < panel.num_years(c); ++t) {
      const double d = theta[panel.cell(c, t)] - theta[panel.cell(c, t - 1)];
      out.sum_sq += d * d;
      ++out.increments;
    }
  }
  return out;
}

double sample_innovation_variance(Engine& eng, std::size_t m, double sum_sq, double upper,
                                  double current) {
  if (m == 0 || !(sum_sq > 0.0)) return upper * draw_open_uniform(eng);
  const double half_m = 0.5 * static_cast<double>(m);
  const double shape = half_m - 1.0;
  const double rate = 0.5 * sum_sq;
  if (shape > 0.0) {
    // kappa = 1/sigma ~ Gamma(shape, rate) truncated to kappa > 1/upper.
    const double tail = boost::math::gamma_q(shape, rate / upper, QuietPolicy());
    if (std::isfinite(tail) && tail > 1e-250) {
      const double p = tail * draw_open_uniform(eng);
      const double z = boost::math::gamma_q_inv(shape, p, QuietPolicy());
      const double sigma = rate / z;
      if (std::isfinite(sigma) && sigma > 0.0 && sigma < upper) return sigma;
    }
  }
  auto log_density = [&](double x) {
    if (!(x > 0.0) || !(x < upper)) return -std::numeric_limits<double>::infinity();
    return -half_m * std::log(x) - sum_sq / (2.0 * x);
  };
  double x0 = (current > 0.0 && current < upper) ? current : std::min(sum_sq / half_m, upper) * 0.5;
  if (!std::isfinite(log_density(x0))) x0 = 0.5 * upper;
  return slice_sample(eng, log_density, x0, 0.1 * upper, 0.0, upper);
}

void sample_tridiagonal(std::span<const double> diag, std::span<const double> off,
                        std::span<const double> b, Engine& eng, std::span<double> out) {
  const std::size_t n = diag.size();
  if (n == 0) return;
  std::vector<double> l(n), m(n > 0 ? n - 1 : 0), v(n);
  for (std::size_t t = 0; t < n; ++t) {
    double d = diag[t];
    if (t > 0) {
      m[t - 1] = off[t - 1] / l[t - 1];
      d -= m[t - 1] * m[t - 1];
    }
    if (!(d >= kMinPrecision) || !std::isfinite(d))
      throw InternalError(fmt::format("trajectory precision not positive definite at {} ({})", t, d));
    l[t] = std::sqrt(d);
    v[t] = (b[t] - (t > 0 ? m[t - 1] * v[t - 1] : 0.0)) / l[t];
  }
  for (std::size_t t = 0; t < n; ++t) v[t] += draw_normal(eng);
  out[n - 1] = v[n - 1] / l[n - 1];
  for (std::size_t t = n - 1; t-- > 0;) out[t] = (v[t] - m[t] * out[t + 1]) / l[t];
}

void update_latents(ChainState& s, const Model& model, const PriorConfig& prior,
                    Schedule schedule) {
  const auto& panel = model.panel();
  for (std::size_t c = 0; c < panel.num_countries(); ++c) {
    Engine& eng = s.rng.latent[c];
    for (auto dim : {LatentDim::Gdp, LatentDim::Pop}) {
      if (schedule == Schedule::BlockedFfbs && trajectory_blockable(s, model, c, dim)) {
        update_trajectory(s, model, prior, c, dim, eng);
        continue;
      }
      for (std::size_t t = 0; t < panel.num_years(c); ++t) update_site(s, model, prior, c, t, dim, eng);
    }
  }
}

void update_intercepts(ChainState& s, const Model& model, const PriorConfig& prior) {
  const auto& panel = model.panel();
  for (std::size_t j = 0; j < panel.num_items(); ++j) {
    if (panel.item(j).fixed_intercept) {
      s.alpha[j] = panel.item(j).intercept_anchor;
      continue;
    }
    const auto cond = intercept_conditional(s, model, prior, j);
    s.alpha[j] = cond.mean + draw_normal(s.rng.alpha[j]) / std::sqrt(cond.precision);
  }
}

void update_precisions(ChainState& s, const Model& model, const PriorConfig& prior) {
  for (int k = 0; k < model.num_categories(); ++k) {
    const auto g = precision_conditional(s, model, prior, k);
    s.tau[static_cast<std::size_t>(k)] = draw_gamma(s.rng.tau[static_cast<std::size_t>(k)], g.shape, g.rate);
  }
}

void update_innovations(ChainState& s, const Model& model, const PriorConfig& prior) {
  for (auto dim : {LatentDim::Gdp, LatentDim::Pop}) {
    const auto d = dim_index(dim);
    const auto cond = innovation_conditional(s, model, dim);
    s.sigma[d] = sample_innovation_variance(s.rng.sigma[d], cond.increments, cond.sum_sq,
                                            prior.sigma_upper, s.sigma[d]);
  }
}

std::optional<std::vector<double>> level_shift_coefficients(const Model& model, LatentDim dim,
                                                            bool intercepts_fixed) {
  const auto& panel = model.panel();
  std::vector<double> coef(panel.num_items(), 0.0);
  for (std::size_t j = 0; j < panel.num_items(); ++j) {
    bool used = false;
    for (std::size_t c = 0; c < panel.num_countries() && !used; ++c)
      for (std::size_t t = 0; t < panel.num_years(c) && !used; ++t) used = model.usable(c, t, j);
    if (!used) continue;
    const auto& link = model.link(j);
    bool reads = false, same_dim = true;
    double sum = 0.0;
    for (std::size_t k = 0; k < link.inputs.size(); ++k) {
      if (link.inputs[k].dim != dim) {
        same_dim = false;
        continue;
      }
      reads = true;
      sum += link.coefficient(k);
    }
    if (!reads) continue;
    if (link.linear()) {
      coef[j] = sum;
    } else if (link.transform == Transform::LogGrowth && same_dim) {
      coef[j] = 0.0;  // depends on differences only
    } else {
      return std::nullopt;
    }
    if (coef[j] != 0.0 && (intercepts_fixed || panel.item(j).fixed_intercept)) return std::nullopt;
  }
  return coef;
}

void update_level_shifts(ChainState& s, const Model& model, const PriorConfig& prior,
                         bool intercepts_fixed) {
  const auto& panel = model.panel();
  for (auto dim : {LatentDim::Gdp, LatentDim::Pop}) {
    const auto coef = level_shift_coefficients(model, dim, intercepts_fixed);
    if (!coef) continue;
    auto& theta = s.theta(dim);
    // log density in delta:
    //   -sum_c (theta_c0 + delta - m0)^2 / 2v0 - sum_j (alpha_j - coef_j delta - a_j)^2 / 2va
    double precision = 0.0, linear = 0.0;
    for (std::size_t c = 0; c < panel.num_countries(); ++c) {
      if (panel.num_years(c) == 0) continue;
      precision += 1.0 / prior.initial_variance;
      linear -= (theta[panel.cell(c, 0)] - prior.initial_mean) / prior.initial_variance;
    }
    for (std::size_t j = 0; j < coef->size(); ++j) {
      const double a = (*coef)[j];
      if (a == 0.0) continue;
      precision += a * a / prior.intercept_variance;
      linear += a * (s.alpha[j] - panel.item(j).intercept_anchor) / prior.intercept_variance;
    }
    if (!(precision > 0.0)) continue;
    const auto d = dim_index(dim);
    const double delta = linear / precision + draw_normal(s.rng.shift[d]) / std::sqrt(precision);
    for (auto& v : theta) v += delta;
    for (std::size_t j = 0; j < coef->size(); ++j) s.alpha[j] -= (*coef)[j] * delta;
  }
}

void gibbs_sweep(ChainState& s, const Model& model, const PriorConfig& prior,
                 const SamplerPlan& plan) {
  update_latents(s, model, prior, plan.schedule);
  if (plan.level_moves) update_level_shifts(s, model, prior, plan.fixed.alpha.has_value());
  if (!plan.fixed.alpha) update_intercepts(s, model, prior);
  if (!plan.fixed.tau) update_precisions(s, model, prior);
  if (!plan.fixed.sigma) update_innovations(s, model, prior);
}

std::vector<double> derived_gdppc_series(const ChainState& s, const Model& model) {
  std::vector<double> out(s.theta_gdp.size());
  if (model.gdppc_form() == GdppcForm::LogDifference) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = derived_gdppc(s.theta_gdp[i], s.theta_pop[i]);
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s.theta_gdp[i] / s.theta_pop[i];
  }
  return out;
}

std::vector<double> derived_link_series(const ChainState& s, const Model& model,
                                        std::size_t index) {
  const auto& panel = model.panel();
  const auto& link = model.derived_series().at(index).link;
  const auto lag = static_cast<std::size_t>(link.max_lag());
  std::vector<double> out(panel.num_cells(), kNaN);
  for (std::size_t c = 0; c < panel.num_countries(); ++c) {
    for (std::size_t t = lag; t < panel.num_years(c); ++t) {
      double x[2];
      for (std::size_t k = 0; k < link.inputs.size(); ++k) {
        const auto& in = link.inputs[k];
        x[k] = s.theta(in.dim)[panel.cell(c, t - static_cast<std::size_t>(in.lag))];
      }
      out[panel.cell(c, t)] = link.eval({x, link.inputs.size()});
    }
  }
  return out;
}

void draw_predictive(const ChainState& s, const Model& model, long long iteration,
                     std::span<double> out) {
  const auto& panel = model.panel();
  const std::size_t nj = panel.num_items();
  for (std::size_t c = 0; c < panel.num_countries(); ++c) {
    Engine eng = s.rng.predictive(c, iteration);
    for (std::size_t j = 0; j < nj; ++j) {
      const double sd = 1.0 / std::sqrt(s.tau[static_cast<std::size_t>(model.category(j))]);
      for (std::size_t t = 0; t < panel.num_years(c); ++t) {
        const auto slot = panel.cell(c, t) * nj + j;
        if (!model.defined(c, t, j)) {
          out[slot] = kNaN;
          continue;
        }
        out[slot] = s.alpha[j] + model.link_value(j, c, t, s.theta_gdp, s.theta_pop) +
                    sd * draw_normal(eng);
      }
    }
  }
}

void check_state(const ChainState& s, int chain, long long iteration) {
  auto fail = [&](std::string_view what, std::size_t i, double v) {
    throw InternalError(fmt::format("chain {} iteration {}: {}[{}] = {} is invalid", chain,
                                    iteration, what, i, v));
  };
  for (std::size_t i = 0; i < s.theta_gdp.size(); ++i)
    if (!std::isfinite(s.theta_gdp[i])) fail("theta_gdp", i, s.theta_gdp[i]);
  for (std::size_t i = 0; i < s.theta_pop.size(); ++i)
    if (!std::isfinite(s.theta_pop[i])) fail("theta_pop", i, s.theta_pop[i]);
  for (std::size_t i = 0; i < s.alpha.size(); ++i)
    if (!std::isfinite(s.alpha[i])) fail("alpha", i, s.alpha[i]);
  for (std::size_t i = 0; i < s.tau.size(); ++i)
    if (!(s.tau[i] > 0.0) || !std::isfinite(s.tau[i])) fail("tau", i, s.tau[i]);
  for (std::size_t i = 0; i < 2; ++i)
    if (!(s.sigma[i] > 0.0) || !std::isfinite(s.sigma[i])) fail("sigma", i, s.sigma[i]);
}

}  // namespace lgdp
