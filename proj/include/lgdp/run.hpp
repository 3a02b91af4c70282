#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "lgdp/draw_store.hpp"
#include "lgdp/gibbs.hpp"

namespace lgdp {

/// Everything recorded for one retained iteration, in store_params() order.
struct RetainedDraw {
  long long iteration = 0;
  const ChainState* state = nullptr;
  std::vector<double> theta_gdppc;
  std::vector<std::vector<double>> derived;  // one per Model::derived_series()
  std::vector<double> ypred;                 // cell * J + j
};

/// Stored parameters: alpha, tau, sigma, theta_gdp, theta_pop, theta_gdppc,
/// growth.<name> per registered extension, ypred.
std::vector<ParamInfo> store_params(const Model& model);

/// Values of parameter `p` (index into store_params) for a retained draw.
std::span<const double> param_values(const RetainedDraw& draw, std::size_t p);

using RetainedCallback = std::function<void(const RetainedDraw&)>;

/// Runs one chain to completion, invoking `on_retained` after every kept
/// iteration (post burn-in, every `thinning`-th).
void run_chain(const Model& model, const PriorConfig& prior, const SamplerPlan& plan, int chain,
               const RetainedCallback& on_retained);

/// Runs plan.n_chains chains (in parallel when threads allow) and writes a
/// DrawStore into `out_dir`, which must not already hold a manifest.
DrawStore run_chains(const Model& model, const PriorConfig& prior, const SamplerPlan& plan,
                     const std::filesystem::path& out_dir);

}  // namespace lgdp
