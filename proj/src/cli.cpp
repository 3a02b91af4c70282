#include "lgdp/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "lgdp/config.hpp"
#include "lgdp/error.hpp"
#include "lgdp/ingest.hpp"
#include "lgdp/pipeline.hpp"
#include "lgdp/posterior.hpp"
#include "lgdp/run.hpp"
#include "lgdp/run_manifest.hpp"
#include "lgdp/validate.hpp"

namespace lgdp {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kRunManifest = "run_manifest.txt";

struct Loaded {
  Config cfg;
  fs::path out;
  std::uint64_t seed = 1;
};

Loaded load(const CommandOptions& o) {
  Loaded l;
  if (!fs::is_regular_file(o.config))
    throw InputError(fmt::format("configuration file {} does not exist", o.config.string()));
  l.cfg = Config::load(o.config);
  if (o.seed) l.cfg.set("seed", std::to_string(*o.seed));
  l.seed = static_cast<std::uint64_t>(l.cfg.get_int("seed", 1));
  if (o.out) {
    l.out = *o.out;
  } else if (auto key = l.cfg.get("output")) {
    l.out = l.cfg.resolve(*key);
  } else {
    throw InputError("no output directory: pass --out or set 'output'");
  }
  return l;
}

RunManifest manifest_for(std::string command, const CommandOptions& o, const Loaded& l) {
  RunManifest m;
  m.command = std::move(command);
  m.config_path = o.config.string();
  m.config_hash = sha256_hex(l.cfg.canonical());
  m.seed = l.seed;
  m.started = utc_timestamp();
  return m;
}

void say(std::ostream& log, bool quiet, const std::string& line) {
  if (!quiet) log << line << '\n';
}

template <class F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const InputError& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const StoreError& e) {
    log << "error: " << e.what() << '\n';
    return kExitStore;
  } catch (const InternalError& e) {
    log << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::filesystem::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    log << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

/// Removes what a failed command created.
class Cleanup {
 public:
  explicit Cleanup(fs::path dir) : dir_(std::move(dir)), existed_(fs::exists(dir_)) {}
  void track(fs::path p) { created_.push_back(std::move(p)); }
  void commit() { committed_ = true; }
  ~Cleanup() {
    if (committed_) return;
    std::error_code ec;
    if (!existed_) {
      fs::remove_all(dir_, ec);
      return;
    }
    for (const auto& p : created_) fs::remove_all(p, ec);
  }

 private:
  fs::path dir_;
  bool existed_;
  bool committed_ = false;
  std::vector<fs::path> created_;
};

void prepare_output(const fs::path& out, std::initializer_list<std::string_view> names) {
  for (auto name : names)
    if (fs::exists(out / name))
      throw InputError(fmt::format("{} already exists; choose an empty output directory",
                                   (out / name).string()));
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw InputError(fmt::format("cannot create {}: {}", out.string(), ec.message()));
}

fs::path store_dir(const fs::path& p) {
  if (fs::exists(p / "draws" / "manifest.txt")) return p / "draws";
  return p;
}

std::string fmt_stat(double v) { return std::isfinite(v) ? fmt::format("{:.4f}", v) : "NA"; }

}  // namespace

int cmd_fit(const CommandOptions& options, std::ostream& log) {
  return guarded(log, [&] {
    const auto l = load(options);
    const auto inputs = input_paths(l.cfg);
    auto model = build_model(l.cfg, load_panel(l.cfg));
    const auto prior = PriorConfig::from_config(l.cfg);
    const auto plan = SamplerPlan::from_config(l.cfg);
    prior.validate();
    plan.validate();
    for (const auto& w : model.warnings()) say(log, options.quiet, "warning: " + w);

    prepare_output(l.out, {"draws", "estimates.csv", "convergence.txt", kRunManifest});
    Cleanup cleanup(l.out);
    for (auto name : {"draws", "estimates.csv", "convergence.txt", "run_manifest.txt"})
      cleanup.track(l.out / name);

    auto manifest = manifest_for("fit", options, l);
    for (const auto& p : inputs) manifest.inputs.emplace_back(p.string(), sha256_file(p));

    const auto& panel = model.panel();
    say(log, options.quiet,
        fmt::format("fit: {} countries, {} cells, {} items, {} observations; {} chains x {} "
                    "iterations ({} burn-in, thinning {}), {}",
                    panel.num_countries(), panel.num_cells(), panel.num_items(),
                    panel.num_observed(), plan.n_chains, plan.n_iterations, plan.n_burnin,
                    plan.thinning, to_string(plan.schedule)));
    const auto store = run_chains(model, prior, plan, l.out / "draws");
    const auto summary = summarize(store);
    const auto report = diagnose(store);
    write_convergence_report(l.out / "convergence.txt", report);
    export_estimates(summary, panel, l.out / "estimates.csv");
    say(log, options.quiet,
        fmt::format("convergence: max PSR {} ({}), min ESS {} ({})", fmt_stat(report.max_psr),
                    report.max_psr_param, fmt_stat(report.min_ess), report.min_ess_param));
    if (report.psr_available && !report.converged())
      say(log, options.quiet, "warning: max PSR exceeds 1.1; chains may not have converged");
    if (!report.psr_available)
      say(log, options.quiet, "warning: PSR needs at least two chains");

    manifest.finished = utc_timestamp();
    manifest.outputs = {{"draws", "draws"},
                        {"estimates", "estimates.csv"},
                        {"convergence", "convergence.txt"}};
    manifest.write(l.out / kRunManifest);
    cleanup.commit();
    return static_cast<int>(kExitOk);
  });
}

int cmd_validate(const CommandOptions& options, std::ostream& log) {
  return guarded(log, [&] {
    if (options.stores.empty() || options.stores.size() > 2)
      throw InputError("validate takes one or two draw stores");
    const auto l = load(options);
    const auto model = build_model(l.cfg, load_panel(l.cfg));
    const auto& panel = model.panel();
    const auto primary = DrawStore::open(store_dir(options.stores[0]));
    if (!(primary.layout() == StoreLayout::from_panel(panel)))
      throw StoreError(fmt::format("draw store {} was not produced on the configured panel",
                                   primary.dir().string()));
    std::optional<DrawStore> secondary;
    if (options.stores.size() == 2) secondary = DrawStore::open(store_dir(options.stores[1]));

    const std::vector<std::string_view> names{
        "zscores.csv",     "zscores_by_item.csv", "zscores_by_count.csv",
        "coverage.csv",    "item_bias.csv",       "uncertainty.csv",
        "correlation.csv", "correlation_long.csv", "rmse.csv",
        kRunManifest};
    for (auto n : names)
      if (fs::exists(l.out / n))
        throw InputError(fmt::format("{} already exists; choose an empty output directory",
                                     (l.out / n).string()));
    fs::create_directories(l.out);
    Cleanup cleanup(l.out);
    for (auto n : names) cleanup.track(l.out / n);
    auto manifest = manifest_for("validate", options, l);
    for (const auto& p : input_paths(l.cfg)) manifest.inputs.emplace_back(p.string(), sha256_file(p));

    const auto summary = summarize(primary);
    const auto z = zscores(panel, summary);
    write_zscores(l.out / "zscores.csv", z);
    write_zgroups(l.out / "zscores_by_item.csv", "item_id", zscores_by_item(z));
    write_zgroups(l.out / "zscores_by_count.csv", "item_count", zscores_by_item_count(z));
    const auto cov = coverage(z);
    write_coverage(l.out / "coverage.csv", cov);
    write_profile(l.out / "item_bias.csv", "item_id", "co_observed", item_bias_profile(z, panel));
    write_profile(l.out / "uncertainty.csv", "latent", "item_count",
                  uncertainty_profile(panel, summary));
    write_correlation(l.out / "correlation.csv", l.out / "correlation_long.csv",
                      correlation_matrix(panel, summary));
    manifest.outputs = {{"zscores", "zscores.csv"},
                        {"zscores_by_item", "zscores_by_item.csv"},
                        {"zscores_by_count", "zscores_by_count.csv"},
                        {"coverage", "coverage.csv"},
                        {"item_bias", "item_bias.csv"},
                        {"uncertainty", "uncertainty.csv"},
                        {"correlation", "correlation.csv"},
                        {"correlation_long", "correlation_long.csv"}};
    say(log, options.quiet,
        fmt::format("coverage (weighted, n={}): {:.4f} / {:.4f} / {:.4f}", cov.weighted.n,
                    cov.weighted.within1, cov.weighted.within2, cov.weighted.within3));
    if (secondary) {
      std::vector<int> targets;
      for (const auto& s : l.cfg.get_list("validate.rmse_items"))
        targets.push_back(static_cast<int>(parse_int(s, "validate.rmse_items")));
      write_rmse(l.out / "rmse.csv", rmse_compare(primary, *secondary, panel, targets));
      manifest.outputs.emplace_back("rmse", "rmse.csv");
    }
    manifest.finished = utc_timestamp();
    manifest.write(l.out / kRunManifest);
    cleanup.commit();
    return static_cast<int>(kExitOk);
  });
}

int cmd_simulate(const CommandOptions& options, std::ostream& log) {
  return guarded(log, [&] {
    const auto l = load(options);
    const auto gen = GenerativeConfig::from_config(l.cfg);
    gen.validate();
    const std::vector<std::string_view> names{"panel.csv", "true_params.txt", "fit.cfg",
                                              kRunManifest};
    for (auto n : names)
      if (fs::exists(l.out / n))
        throw InputError(fmt::format("{} already exists; choose an empty output directory",
                                     (l.out / n).string()));
    fs::create_directories(l.out);
    Cleanup cleanup(l.out);
    for (auto n : names) cleanup.track(l.out / n);
    auto manifest = manifest_for("simulate", options, l);

    const auto sim = simulate_panel(gen, l.seed);
    std::vector<SourceRecord> records;
    for (const auto& o : flatten(sim.panel)) records.push_back({o.country, o.year, o.item_id, o.value, std::nullopt, true});
    write_records(l.out / "panel.csv", records);
    write_true_params(l.out / "true_params.txt", sim);
    if (records.empty()) log << "warning: the simulated panel has no observations\n";

    // A configuration that fits the synthetic panel: every non-simulation key
    // of the input configuration plus the generating item catalog.
    Config fit;
    for (const auto& key : l.cfg.keys_with_prefix("")) {
      if (key.rfind("sim.", 0) == 0 || key == "output" || key.rfind("input", 0) == 0 ||
          key.rfind("item.", 0) == 0 || key.rfind("items.", 0) == 0 || key.rfind("filter.", 0) == 0)
        continue;
      fit.set(key, *l.cfg.get(key));
    }
    fit.set("input", "panel.csv");
    fit.set("input.logged", "true");
    fit.set("filter.source_defaults", "false");
    fit.set("filter.min_year", std::to_string(gen.first_year));
    fit.set("filter.max_year", std::to_string(gen.first_year + static_cast<int>(gen.years)));
    fit.set("items.default_catalog", "false");
    for (const auto& item : gen.items) {
      const auto prefix = fmt::format("item.{}.", item.item_id);
      fit.set(prefix + "name", item.name);
      fit.set(prefix + "dimension", std::string(to_string(item.dimension)));
      fit.set(prefix + "anchor", fmt::format("{:.17g}", item.intercept_anchor));
      if (item.identification) fit.set(prefix + "identification", "true");
    }
    {
      std::ofstream out(l.out / "fit.cfg", std::ios::binary);
      out << "# fits panel.csv; intercept anchors are the generating centers\n";
      for (const auto& key : fit.keys_with_prefix("")) out << key << " = " << *fit.get(key) << '\n';
      if (!out) throw InputError("cannot write fit.cfg");
    }
    say(log, options.quiet,
        fmt::format("simulate: {} countries x {} years x {} items, {} observations",
                    gen.countries, gen.years, gen.items.size(), records.size()));
    manifest.finished = utc_timestamp();
    manifest.outputs = {{"panel", "panel.csv"}, {"truth", "true_params.txt"}, {"config", "fit.cfg"}};
    manifest.write(l.out / kRunManifest);
    cleanup.commit();
    return static_cast<int>(kExitOk);
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian latent-variable estimates of national output and population"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  CommandOptions options;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::vector<std::string> stores;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", options.config, "configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides 'output')");
    sub->add_option("--seed", seed, "random seed (overrides 'seed')");
    sub->add_flag("--quiet", options.quiet, "suppress progress output");
  };
  auto* fit = app.add_subcommand("fit", "estimate the model and export posterior summaries");
  common(fit);
  auto* validate = app.add_subcommand("validate", "validation tables for one or two draw stores");
  common(validate);
  validate->add_option("stores", stores, "fit directory or draw store (one or two)")
      ->required()
      ->expected(1, 2);
  auto* simulate = app.add_subcommand("simulate", "draw a synthetic panel from the model");
  common(simulate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int rc = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return rc == 0 ? 0 : static_cast<int>(kExitInput);
  }
  if (!out_dir.empty()) options.out = out_dir;
  if (app.get_subcommand("fit")->count("--seed") || app.get_subcommand("validate")->count("--seed") ||
      app.get_subcommand("simulate")->count("--seed"))
    options.seed = seed;
  for (const auto& s : stores) options.stores.emplace_back(s);

  if (fit->parsed()) return cmd_fit(options, err);
  if (validate->parsed()) return cmd_validate(options, err);
  return cmd_simulate(options, err);
}

}  // namespace lgdp
