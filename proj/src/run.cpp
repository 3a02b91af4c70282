#include "lgdp/run.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "lgdp/error.hpp"

namespace lgdp {

std::vector<ParamInfo> store_params(const Model& model) {
  const auto& panel = model.panel();
  std::vector<ParamInfo> params{
      {"alpha", panel.num_items()},
      {"tau", static_cast<std::size_t>(model.num_categories())},
      {"sigma", 2},
      {"theta_gdp", panel.num_cells()},
      {"theta_pop", panel.num_cells()},
      {"theta_gdppc", panel.num_cells()},
  };
  for (const auto& d : model.derived_series()) params.push_back({"growth." + d.name, panel.num_cells()});
  params.push_back({"ypred", panel.num_cells() * panel.num_items()});
  return params;
}

std::span<const double> param_values(const RetainedDraw& draw, std::size_t p) {
  const auto& s = *draw.state;
  switch (p) {
    case 0: return s.alpha;
    case 1: return s.tau;
    case 2: return s.sigma;
    case 3: return s.theta_gdp;
    case 4: return s.theta_pop;
    case 5: return draw.theta_gdppc;
    default: break;
  }
  const std::size_t k = p - 6;
  if (k < draw.derived.size()) return draw.derived[k];
  return draw.ypred;
}

void run_chain(const Model& model, const PriorConfig& prior, const SamplerPlan& plan, int chain,
               const RetainedCallback& on_retained) {
  plan.validate();
  prior.validate();
  ChainState state = init_chain(model, prior, plan, chain);
  const auto& panel = model.panel();
  RetainedDraw draw;
  draw.state = &state;
  draw.ypred.resize(panel.num_cells() * panel.num_items());
  for (long long it = 0; it < plan.n_iterations; ++it) {
    gibbs_sweep(state, model, prior, plan);
    check_state(state, chain, it);
    if (it < plan.n_burnin || (it - plan.n_burnin) % plan.thinning != 0) continue;
    draw.iteration = it;
    draw.theta_gdppc = derived_gdppc_series(state, model);
    draw.derived.clear();
    for (std::size_t d = 0; d < model.derived_series().size(); ++d)
      draw.derived.push_back(derived_link_series(state, model, d));
    draw_predictive(state, model, it, draw.ypred);
    on_retained(draw);
  }
}

DrawStore run_chains(const Model& model, const PriorConfig& prior, const SamplerPlan& plan,
                     const std::filesystem::path& out_dir) {
  plan.validate();
  model.require_linked();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw StoreError(fmt::format("cannot create {}: {}", out_dir.string(), ec.message()));
  if (std::filesystem::exists(out_dir / "manifest.txt"))
    throw StoreError(fmt::format("{} already holds a draw store", out_dir.string()));

  const auto params = store_params(model);
  auto run_one = [&](int chain) {
    ChainWriter writer(out_dir, chain, params);
    run_chain(model, prior, plan, chain, [&](const RetainedDraw& draw) {
      for (std::size_t p = 0; p < params.size(); ++p) writer.write(p, param_values(draw, p));
    });
    writer.close();
  };

  int workers = plan.threads > 0 ? plan.threads
                                 : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, plan.n_chains);
  if (workers <= 1) {
    for (int c = 0; c < plan.n_chains; ++c) run_one(c);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int c = next++; c < plan.n_chains; c = next++) {
          try {
            run_one(c);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::map<std::string, std::string> meta{
      {"seed", std::to_string(plan.seed)},
      {"iterations", std::to_string(plan.n_iterations)},
      {"burnin", std::to_string(plan.n_burnin)},
      {"thinning", std::to_string(plan.thinning)},
      {"schedule", std::string(to_string(plan.schedule))},
      {"gdppc_link", model.gdppc_form() == GdppcForm::LogDifference ? "log-difference" : "ratio"},
  };
  write_manifest(out_dir, StoreLayout::from_panel(model.panel()), params, plan.n_chains,
                 plan.retained_per_chain(), meta);
  return DrawStore::open(out_dir);
}

}  // namespace lgdp
