#include "lgdp/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "lgdp/error.hpp"

namespace lgdp {

namespace {

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

int column_of(const std::vector<std::string>& header, const std::string& name,
              std::string_view origin, bool required) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    if (required) throw InputError(fmt::format("{}:1: header lacks column '{}'", origin, name));
    return -1;
  }
  return static_cast<int>(it - header.begin());
}

}  // namespace

std::vector<SourceRecord> parse_records(std::string_view text, const RecordFormat& format,
                                        std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    for (auto& h : split(line, format.delimiter)) header.push_back(unquote(trim(h)));
  }
  if (header.empty()) throw InputError(fmt::format("{}: missing header row", origin));

  const int c_country = column_of(header, format.country_column, origin, true);
  const int c_year = column_of(header, format.year_column, origin, true);
  const int c_item = column_of(header, format.item_column, origin, true);
  const int c_value = column_of(header, format.value_column, origin, true);
  const int c_origin = column_of(header, format.origin_column, origin, false);

  std::vector<SourceRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, format.delimiter);
    for (auto& f : fields) f = unquote(trim(f));
    if (fields.size() != header.size())
      throw InputError(fmt::format("{}:{}: expected {} fields, found {}", origin, line_no,
                                   header.size(), fields.size()));
    const auto where = fmt::format("{}:{}", origin, line_no);
    SourceRecord rec;
    rec.country = fields[c_country];
    if (rec.country.empty()) throw InputError(fmt::format("{}: empty country id", where));
    rec.year = static_cast<int>(parse_int(fields[c_year], where + " year"));
    rec.item_id = static_cast<int>(parse_int(fields[c_item], where + " item_id"));
    rec.value = parse_double(fields[c_value], where + " value");
    if (c_origin >= 0 && !fields[c_origin].empty()) rec.origin_code = fields[c_origin];
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<SourceRecord> load_records(const std::filesystem::path& path,
                                       const RecordFormat& format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open input file {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_records(buf.str(), format, path.string());
}

void write_records(const std::filesystem::path& path, std::span<const SourceRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out << kRecordHeader << '\n';
  for (const auto& r : records)
    out << fmt::format("{},{},{},{:.17g},{}\n", r.country, r.year, r.item_id, r.value,
                       r.origin_code.value_or(""));
  if (!out) throw InputError(fmt::format("write failed for {}", path.string()));
}

FilterPolicy FilterPolicy::source_defaults() {
  FilterPolicy p;
  // Gleditsch GDP, population, GDP per capita: PWT-derived rows only.
  for (int item : {2, 7, 12}) {
    ItemFilter f;
    f.retained_codes = {"0", "-1", "3"};
    f.excluded_codes = {"-2", "1", "2"};
    p.per_item[item] = f;
  }
  // Correlates of War population: identified sources only.
  p.per_item[10].retained_codes = {"A"};
  return p;
}

FilterPolicy FilterPolicy::from_config(const Config& cfg) {
  FilterPolicy p = cfg.get_bool("filter.source_defaults", true) ? source_defaults() : FilterPolicy{};
  p.min_year = static_cast<int>(cfg.get_int("filter.min_year", p.min_year));
  p.max_year = static_cast<int>(cfg.get_int("filter.max_year", p.max_year));
  for (const auto& key : cfg.keys_with_prefix("filter.item.")) {
    // filter.item.<id>.<field>
    const auto parts = split(key, '.');
    if (parts.size() != 4) throw InputError(fmt::format("malformed filter key '{}'", key));
    const int item = static_cast<int>(parse_int(parts[2], key));
    auto& f = p.per_item[item];
    const auto values = cfg.get_list(key);
    if (parts[3] == "retain") {
      f.retained_codes = {values.begin(), values.end()};
    } else if (parts[3] == "exclude") {
      f.excluded_codes = {values.begin(), values.end()};
    } else if (parts[3] == "min_year") {
      f.min_year = static_cast<int>(cfg.get_int(key, 0));
    } else {
      throw InputError(fmt::format("unknown filter field in '{}'", key));
    }
  }
  return p;
}

std::vector<SourceRecord> apply_filters(std::span<const SourceRecord> records,
                                        const FilterPolicy& policy) {
  std::vector<SourceRecord> out;
  for (const auto& r : records) {
    if (r.year < policy.min_year || r.year > policy.max_year) continue;
    if (auto it = policy.per_item.find(r.item_id); it != policy.per_item.end()) {
      const auto& f = it->second;
      if (f.min_year && r.year < *f.min_year) continue;
      if (r.origin_code && f.excluded_codes.count(*r.origin_code)) continue;
      if (!f.retained_codes.empty() &&
          (!r.origin_code || !f.retained_codes.count(*r.origin_code)))
        continue;
    }
    out.push_back(r);
  }
  return out;
}

std::vector<SourceRecord> log_transform(std::span<const SourceRecord> records) {
  std::vector<SourceRecord> out(records.begin(), records.end());
  for (auto& r : out) {
    if (r.logged) continue;
    if (!(r.value > 0.0))
      throw InputError(fmt::format("cannot take log of {} at ({}, {}, item {})", r.value,
                                   r.country, r.year, r.item_id));
    r.value = std::log(r.value);
    r.logged = true;
  }
  return out;
}

std::vector<Observation> to_observations(std::span<const SourceRecord> records) {
  std::vector<Observation> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (!r.logged)
      throw InputError(fmt::format("record ({}, {}, item {}) has not been log transformed",
                                   r.country, r.year, r.item_id));
    out.push_back({r.country, r.year, r.item_id, r.value});
  }
  return out;
}

std::vector<ItemSpec> default_item_catalog() {
  auto item = [](int id, std::string name, Dimension d, std::string unit) {
    ItemSpec s;
    s.item_id = id;
    s.name = std::move(name);
    s.dimension = d;
    s.unit_note = std::move(unit);
    return s;
  };
  std::vector<ItemSpec> items{
      item(1, "Maddison GDP", Dimension::Gdp, "1990 international dollars"),
      item(2, "Gleditsch GDP", Dimension::Gdp, "PWT-based, 2005 US dollars"),
      item(3, "World Bank GDP", Dimension::Gdp, "constant US dollars"),
      item(4, "Broadberry & Klein GDP", Dimension::Gdp, "millions of 1990 international dollars"),
      item(5, "Bairoch GNP", Dimension::Gdp, "1960 US dollars"),
      item(6, "Maddison pop", Dimension::Pop, "thousands, mid-year"),
      item(7, "Gleditsch pop", Dimension::Pop, "thousands"),
      item(8, "World Bank pop", Dimension::Pop, "persons"),
      item(9, "Broadberry & Klein pop", Dimension::Pop, "millions"),
      item(10, "Singer (CINC) pop", Dimension::Pop, "thousands"),
      item(11, "Maddison GDPPC", Dimension::Gdppc, "1990 international dollars"),
      item(12, "Gleditsch GDPPC", Dimension::Gdppc, "PWT-based, 2005 US dollars"),
      item(13, "World Bank GDPPC", Dimension::Gdppc, "constant US dollars"),
      item(14, "Broadberry & Klein GDPPC", Dimension::Gdppc, "1990 international dollars"),
      item(15, "Bairoch GNPPC", Dimension::Gdppc, "1960 US dollars"),
      item(16, "Broadberry GDPPC", Dimension::Gdppc, "1990 international dollars"),
  };
  items[0].identification = true;
  items[5].identification = true;
  return items;
}

std::vector<ItemSpec> item_catalog_from_config(const Config& cfg) {
  auto items = cfg.get_bool("items.default_catalog", true) ? default_item_catalog()
                                                          : std::vector<ItemSpec>{};
  auto find_or_add = [&](int id) -> ItemSpec& {
    for (auto& s : items)
      if (s.item_id == id) return s;
    ItemSpec s;
    s.item_id = id;
    s.name = fmt::format("item {}", id);
    items.push_back(s);
    return items.back();
  };
  for (const auto& key : cfg.keys_with_prefix("item.")) {
    const auto parts = split(key, '.');
    if (parts.size() != 3) throw InputError(fmt::format("malformed item key '{}'", key));
    auto& spec = find_or_add(static_cast<int>(parse_int(parts[1], key)));
    const auto& field = parts[2];
    const auto value = *cfg.get(key);
    if (field == "name") {
      spec.name = value;
    } else if (field == "dimension") {
      spec.dimension = parse_dimension(value);
    } else if (field == "unit") {
      spec.unit_note = value;
    } else if (field == "identification") {
      spec.identification = cfg.get_bool(key, false);
    } else if (field == "fixed") {
      spec.fixed_intercept = cfg.get_bool(key, false);
    } else if (field == "anchor" || field == "link") {
      // consumed by anchor_policy_from_config / extension setup
    } else {
      throw InputError(fmt::format("unknown item field in '{}'", key));
    }
  }
  for (auto& s : items) {
    if (s.dimension == Dimension::Growth && !cfg.has(fmt::format("item.{}.fixed", s.item_id)))
      s.fixed_intercept = true;
  }
  std::sort(items.begin(), items.end(),
            [](const ItemSpec& a, const ItemSpec& b) { return a.item_id < b.item_id; });
  return items;
}

std::vector<ItemSpec> compute_anchors(const Panel& panel, const AnchorPolicy& policy) {
  std::vector<ItemSpec> specs = panel.items();
  for (std::size_t j = 0; j < specs.size(); ++j) {
    auto& spec = specs[j];
    if (auto it = policy.explicit_anchors.find(spec.item_id);
        it != policy.explicit_anchors.end()) {
      spec.intercept_anchor = it->second;
    } else {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t cell = 0; cell < panel.num_cells(); ++cell) {
        if (!panel.observed(cell, j)) continue;
        sum += panel.value(cell, j);
        ++n;
      }
      if (n == 0)
        throw InputError(fmt::format(
            "item {} ({}) has no observations and no explicit anchor", spec.item_id, spec.name));
      spec.intercept_anchor = sum / static_cast<double>(n);
    }
    if (policy.fix_identification && spec.identification) spec.fixed_intercept = true;
  }
  return specs;
}

AnchorPolicy anchor_policy_from_config(const Config& cfg) {
  AnchorPolicy p;
  p.fix_identification = cfg.get_bool("intercepts.fix_identification", false);
  for (const auto& key : cfg.keys_with_prefix("item.")) {
    const auto parts = split(key, '.');
    if (parts.size() == 3 && parts[2] == "anchor")
      p.explicit_anchors[static_cast<int>(parse_int(parts[1], key))] = cfg.get_double(key, 0.0);
  }
  for (const auto& s : item_catalog_from_config(cfg)) {
    if (s.dimension == Dimension::Growth && !p.explicit_anchors.count(s.item_id))
      p.explicit_anchors[s.item_id] = 0.0;
  }
  return p;
}

}  // namespace lgdp
