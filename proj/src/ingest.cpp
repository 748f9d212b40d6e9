#include "sitesel/ingest.hpp"

#include "sitesel/csv.hpp"
#include "sitesel/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace sitesel {
namespace {

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

void expect_header(const csv::Row& row, const std::vector<std::string>& header) {
  if (row.fields != header) {
    std::string expected;
    for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
    throw Error(Errc::MalformedRow, at_line(row.line) + "expected header '" + expected + "'");
  }
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

bool is_blank(std::string_view s) { return s.find_first_not_of(" \t") == std::string_view::npos; }

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<SiteRecord> parse_hierarchy_file(std::string_view text, const Levels& levels) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw Error(Errc::EmptyFile, "hierarchy file is empty");
  expect_header(rows.front(), {"code", "name", "level", "parent_code"});

  std::vector<SiteRecord> records;
  records.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.fields.size() != 4) {
      throw Error(Errc::MalformedRow, at_line(row.line) + "expected 4 columns, found " +
                                          std::to_string(row.fields.size()));
    }
    if (row.fields[0].empty()) throw Error(Errc::MalformedRow, at_line(row.line) + "empty site code");
    auto level = levels.find(row.fields[2]);
    if (!level) throw Error(Errc::UnknownLevelName, at_line(row.line) + "unknown level '" + row.fields[2] + "'");
    records.push_back(SiteRecord{row.fields[0], row.fields[1], *level, row.fields[3]});
  }
  if (records.empty()) throw Error(Errc::EmptyFile, "hierarchy file has no data rows");
  return records;
}

std::string serialize_hierarchy(std::span<const SiteRecord> records, const Levels& levels) {
  std::string out = "code,name,level,parent_code\n";
  for (const auto& r : records) {
    out += csv::join({r.code, r.name, levels.name(r.level), r.parent_code});
    out += '\n';
  }
  return out;
}

ParsedFactorFile parse_factor_file(std::string_view text, const FactorDescriptor& descriptor) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw Error(Errc::EmptyFile, "factor file for '" + descriptor.id + "' is empty");
  expect_header(rows.front(), {"site_code", "year", "value"});

  ParsedFactorFile out;
  std::set<std::pair<std::string, int>, std::less<>> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    ++out.rows;
    if (row.fields.size() != 3) {
      throw Error(Errc::MalformedRow, at_line(row.line) + "expected 3 columns, found " +
                                          std::to_string(row.fields.size()));
    }
    auto year = parse_int(row.fields[1]);
    if (!year) throw Error(Errc::NonNumericValue, at_line(row.line) + "year '" + row.fields[1] + "' is not an integer");
    if (!seen.emplace(row.fields[0], *year).second) {
      throw Error(Errc::DuplicateObservation,
                  at_line(row.line) + descriptor.id + " for " + row.fields[0] + " in " + row.fields[1] + " repeated");
    }
    if (is_blank(row.fields[2])) {
      ++out.skipped;
      out.warnings.push_back(descriptor.id + ": " + at_line(row.line) + "blank value for " + row.fields[0] + " skipped");
      continue;
    }
    auto value = parse_number(row.fields[2]);
    if (!value) {
      throw Error(Errc::NonNumericValue, at_line(row.line) + "value '" + row.fields[2] + "' is not a number");
    }
    out.values.push_back(FactorValue{row.fields[0], descriptor.id, *year, *value});
  }
  return out;
}

std::string serialize_factor_values(std::span<const FactorValue> values) {
  std::string out = "site_code,year,value\n";
  for (const auto& v : values) {
    out += csv::join({v.site_code, std::to_string(v.year), format_number(v.value)});
    out += '\n';
  }
  return out;
}

ParsedPresenceFile parse_presence_file(std::string_view text, std::string label) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw Error(Errc::EmptyFile, "presence file for '" + label + "' is empty");
  expect_header(rows.front(), {"site_code", "count"});

  ParsedPresenceFile out;
  out.presence.label = std::move(label);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    ++out.rows;
    if (row.fields.size() != 2) {
      throw Error(Errc::MalformedRow, at_line(row.line) + "expected 2 columns, found " +
                                          std::to_string(row.fields.size()));
    }
    auto n = parse_int(row.fields[1]);
    if (!n || *n < 0) throw Error(Errc::NonNumericValue, at_line(row.line) + "count '" + row.fields[1] + "' invalid");
    if (*n == 0) continue;
    out.presence.counts[row.fields[0]] += *n;
  }
  return out;
}

std::string serialize_presence(const PresenceSet& presence) {
  std::string out = "site_code,count\n";
  for (const auto& [code, n] : presence.counts) {
    out += csv::join({code, std::to_string(n)});
    out += '\n';
  }
  return out;
}

// --- manifest ---

namespace {

const nlohmann::json& field(const nlohmann::json& obj, const char* name) {
  if (!obj.is_object() || !obj.contains(name)) {
    throw Error(Errc::SchemaViolation, std::string("manifest: missing field '") + name + "'");
  }
  return obj.at(name);
}

std::string string_field(const nlohmann::json& obj, const char* name) {
  const auto& v = field(obj, name);
  if (!v.is_string()) throw Error(Errc::SchemaViolation, std::string("manifest: '") + name + "' must be a string");
  return v.get<std::string>();
}

std::string optional_string(const nlohmann::json& obj, const char* name) {
  if (!obj.contains(name)) return {};
  return string_field(obj, name);
}

}  // namespace

DatasetManifest parse_manifest(const nlohmann::json& document, const std::filesystem::path& base_dir) {
  if (!document.is_object()) throw Error(Errc::SchemaViolation, "manifest must be a JSON object");
  DatasetManifest m;
  m.hierarchy = base_dir / string_field(document, "hierarchy");

  const auto& levels = field(document, "levels");
  if (!levels.is_array()) throw Error(Errc::SchemaViolation, "manifest: 'levels' must be an array");
  std::vector<std::string> names;
  for (const auto& l : levels) {
    if (!l.is_string()) throw Error(Errc::SchemaViolation, "manifest: level names must be strings");
    names.push_back(l.get<std::string>());
  }
  m.levels = Levels(std::move(names));

  std::set<std::string> ids;
  if (document.contains("factors")) {
    const auto& factors = document.at("factors");
    if (!factors.is_array()) throw Error(Errc::SchemaViolation, "manifest: 'factors' must be an array");
    for (const auto& f : factors) {
      FactorDescriptor d;
      d.id = string_field(f, "id");
      d.name = optional_string(f, "name");
      d.unit = optional_string(f, "unit");
      d.file = base_dir / string_field(f, "file");
      d.native_level = string_field(f, "native_level");
      const auto agg = string_field(f, "aggregation");
      auto parsed = parse_aggregation(agg);
      if (!parsed) throw Error(Errc::SchemaViolation, "manifest: aggregation '" + agg + "' for '" + d.id + "'");
      d.aggregation = *parsed;
      if (d.id.empty() || !ids.insert(d.id).second) {
        throw Error(Errc::SchemaViolation, "manifest: factor id '" + d.id + "' empty or duplicated");
      }
      m.factors.push_back(std::move(d));
    }
  }

  if (document.contains("presence")) {
    const auto& presence = document.at("presence");
    if (!presence.is_array()) throw Error(Errc::SchemaViolation, "manifest: 'presence' must be an array");
    std::set<std::string> labels;
    for (const auto& p : presence) {
      PresenceDescriptor d{string_field(p, "label"), base_dir / string_field(p, "file")};
      if (!labels.insert(d.label).second) {
        throw Error(Errc::SchemaViolation, "manifest: presence label '" + d.label + "' duplicated");
      }
      m.presence.push_back(std::move(d));
    }
  }

  if (document.contains("years")) {
    const auto& y = document.at("years");
    if (!y.is_array() || y.size() != 2 || !y[0].is_number_integer() || !y[1].is_number_integer() ||
        y[0].get<int>() > y[1].get<int>()) {
      throw Error(Errc::SchemaViolation, "manifest: 'years' must be [first, last]");
    }
    m.years = YearRange{y[0].get<int>(), y[1].get<int>()};
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  const auto text = read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::SchemaViolation, "manifest '" + path.string() + "' is not valid JSON: " + e.what());
  }
  auto m = parse_manifest(doc, path.parent_path());
  auto require = [](const std::filesystem::path& p) {
    if (!std::filesystem::is_regular_file(p)) throw Error(Errc::FileNotFound, "'" + p.string() + "' does not exist");
  };
  require(m.hierarchy);
  for (const auto& f : m.factors) require(f.file);
  for (const auto& p : m.presence) require(p.file);
  return m;
}

nlohmann::json manifest_to_json(const DatasetManifest& manifest, const std::filesystem::path& base_dir) {
  auto rel = [&](const std::filesystem::path& p) { return p.lexically_relative(base_dir).generic_string(); };
  nlohmann::json doc;
  doc["hierarchy"] = rel(manifest.hierarchy);
  doc["levels"] = manifest.levels.names();
  doc["factors"] = nlohmann::json::array();
  for (const auto& f : manifest.factors) {
    doc["factors"].push_back({{"id", f.id},
                              {"name", f.name},
                              {"unit", f.unit},
                              {"file", rel(f.file)},
                              {"native_level", f.native_level},
                              {"aggregation", std::string(to_string(f.aggregation))}});
  }
  if (!manifest.presence.empty()) {
    doc["presence"] = nlohmann::json::array();
    for (const auto& p : manifest.presence) doc["presence"].push_back({{"label", p.label}, {"file", rel(p.file)}});
  }
  if (manifest.years) doc["years"] = {manifest.years->first, manifest.years->last};
  return doc;
}

// --- snapshot assembly ---

IngestResult build_snapshot(const DatasetManifest& manifest) {
  IngestResult result;
  auto& report = result.report;

  std::optional<Hierarchy> hierarchy;
  try {
    auto records = parse_hierarchy_file(read_file(manifest.hierarchy), manifest.levels);
    hierarchy = Hierarchy::build(manifest.levels, records);
  } catch (const Error& e) {
    report.errors.push_back(std::string("hierarchy: ") + e.what());
    return result;
  }
  report.sites = hierarchy->size();

  SnapshotBuilder builder(std::move(*hierarchy), manifest.years.value_or(YearRange{}));
  const auto& hier = builder.hierarchy();

  for (const auto& d : manifest.factors) {
    auto level = manifest.levels.find(d.native_level);
    if (!level) {
      report.errors.push_back("factor " + d.id + ": unknown native level '" + d.native_level + "'");
      continue;
    }
    ParsedFactorFile parsed;
    try {
      parsed = parse_factor_file(read_file(d.file), d);
    } catch (const Error& e) {
      report.errors.push_back("factor " + d.id + ": " + e.what());
      continue;
    }
    builder.add_factor(LocationFactor{d.id, d.name, d.unit, *level, d.aggregation});
    ++report.factors;
    report.rows += parsed.rows;
    report.skipped += parsed.skipped;
    report.warnings.insert(report.warnings.end(), parsed.warnings.begin(), parsed.warnings.end());

    std::set<int> years;
    std::map<int, std::size_t> native_per_year;
    for (const auto& v : parsed.values) {
      const auto site = hier.find(v.site_code);
      if (!site) {
        ++report.orphaned;
        report.warnings.push_back("factor " + d.id + ": orphan value for unknown site '" + v.site_code + "' dropped");
        continue;
      }
      try {
        builder.add_value(v.site_code, d.id, v.year, v.value);
      } catch (const Error& e) {
        if (e.code() != Errc::YearOutOfRange) throw;
        ++report.skipped;
        report.warnings.push_back("factor " + d.id + ": " + v.site_code + " " + e.what());
        continue;
      }
      ++report.accepted;
      years.insert(v.year);
      if (hier.site(*site).level == *level) ++native_per_year[v.year];
    }

    const auto expected = hier.count_at(*level);
    for (int y : years) {
      const auto have = native_per_year[y];
      if (have < expected) {
        report.warnings.push_back("factor " + d.id + ": " + std::to_string(expected - have) + " of " +
                                  std::to_string(expected) + " " + d.native_level + " sites missing a value for " +
                                  std::to_string(y));
      }
    }
  }

  for (const auto& p : manifest.presence) {
    try {
      auto parsed = parse_presence_file(read_file(p.file), p.label);
      PresenceSet kept{p.label, {}};
      for (const auto& [code, n] : parsed.presence.counts) {
        if (!hier.find(code)) {
          report.warnings.push_back("presence " + p.label + ": unknown site '" + code + "' dropped");
          continue;
        }
        kept.counts.emplace(code, n);
      }
      result.presence.push_back(std::move(kept));
      ++report.presence_sets;
    } catch (const Error& e) {
      report.errors.push_back("presence " + p.label + ": " + e.what());
    }
  }

  if (!report.ok()) return result;

  auto snapshot = std::move(builder).build();
  for (auto& w : additive_mismatches(snapshot)) report.warnings.push_back("additive mismatch: " + w);
  result.snapshot = std::move(snapshot);
  return result;
}

}  // namespace sitesel
