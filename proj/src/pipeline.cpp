#include "lgdp/pipeline.hpp"

#include <fmt/format.h>

#include "lgdp/error.hpp"
#include "lgdp/extend.hpp"
#include "lgdp/ingest.hpp"

namespace lgdp {

std::vector<std::filesystem::path> input_paths(const Config& cfg) {
  std::vector<std::filesystem::path> out;
  for (const auto& p : cfg.get_list("input")) out.push_back(cfg.resolve(p));
  if (out.empty()) throw InputError("configuration names no input file (key 'input')");
  for (const auto& p : out)
    if (!std::filesystem::is_regular_file(p))
      throw InputError(fmt::format("input file {} does not exist", p.string()));
  return out;
}

Panel load_panel(const Config& cfg) {
  std::vector<SourceRecord> records;
  for (const auto& path : input_paths(cfg)) {
    auto part = load_records(path);
    records.insert(records.end(), part.begin(), part.end());
  }
  if (cfg.get_bool("input.logged", false))
    for (auto& r : records) r.logged = true;
  records = apply_filters(records, FilterPolicy::from_config(cfg));
  records = log_transform(records);
  const auto observations = to_observations(records);
  const auto catalog = item_catalog_from_config(cfg);
  Panel panel = build_panel(observations, catalog);
  return panel.with_item_specs(compute_anchors(panel, anchor_policy_from_config(cfg)));
}

Model build_model(const Config& cfg, Panel panel) {
  Model model(std::move(panel), parse_gdppc_form(cfg.get_string("model.gdppc_link", "log-difference")));
  const auto registry = LinkRegistry::from_config(cfg);
  if (!registry.links().empty()) model = register_extensions(model, registry);
  model.require_linked();
  return model;
}

}  // namespace lgdp
