#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lgdp/config.hpp"
#include "lgdp/model.hpp"
#include "lgdp/panel.hpp"

namespace lgdp {

/// Input files named by the `input` key (comma separated, relative to the
/// config file). Throws InputError when none is given or a file is missing.
std::vector<std::filesystem::path> input_paths(const Config& cfg);

/// Loads, filters and log transforms every input (skipped for
/// `input.logged = true`), builds the panel on the configured item catalog
/// and sets intercept anchors.
Panel load_panel(const Config& cfg);

/// Model on `panel` with the configured GDPPC form (`model.gdppc_link`) and
/// every declared extension registered.
Model build_model(const Config& cfg, Panel panel);

}  // namespace lgdp
