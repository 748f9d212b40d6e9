#pragma once

#include "sitesel/hierarchy.hpp"
#include "sitesel/presence.hpp"
#include "sitesel/snapshot.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sitesel {

/// Parses a hierarchy file with header `code,name,level,parent_code`.
/// Throws EmptyFile, MalformedRow, UnknownLevelName.
std::vector<SiteRecord> parse_hierarchy_file(std::string_view text, const Levels& levels);
std::string serialize_hierarchy(std::span<const SiteRecord> records, const Levels& levels);

struct FactorDescriptor {
  std::string id;
  std::string name;
  std::string unit;
  std::filesystem::path file;
  std::string native_level;
  Aggregation aggregation = Aggregation::None;
};

struct ParsedFactorFile {
  std::vector<FactorValue> values;
  std::vector<std::string> warnings;
  std::size_t rows = 0;
  std::size_t skipped = 0;  // blank value cells
};

/// Parses a factor file with header `site_code,year,value`. Blank value cells
/// are skipped with a warning. Throws EmptyFile, MalformedRow,
/// NonNumericValue, DuplicateObservation.
ParsedFactorFile parse_factor_file(std::string_view text, const FactorDescriptor& descriptor);
std::string serialize_factor_values(std::span<const FactorValue> values);

struct ParsedPresenceFile {
  PresenceSet presence;
  std::size_t rows = 0;
};

/// Parses a presence file with header `site_code,count`. Repeated site codes
/// accumulate. Throws EmptyFile, MalformedRow, NonNumericValue.
ParsedPresenceFile parse_presence_file(std::string_view text, std::string label);
std::string serialize_presence(const PresenceSet& presence);

struct PresenceDescriptor {
  std::string label;
  std::filesystem::path file;
};

struct DatasetManifest {
  std::filesystem::path hierarchy;
  Levels levels = Levels::defaults();
  std::vector<FactorDescriptor> factors;
  std::vector<PresenceDescriptor> presence;
  std::optional<YearRange> years;
};

/// Relative file paths are resolved against `base_dir`. Throws
/// SchemaViolation on structural problems or duplicate factor ids.
DatasetManifest parse_manifest(const nlohmann::json& document, const std::filesystem::path& base_dir);
/// Throws FileNotFound for the manifest or any file it references.
DatasetManifest load_manifest(const std::filesystem::path& path);
nlohmann::json manifest_to_json(const DatasetManifest& manifest, const std::filesystem::path& base_dir);

struct ValidationReport {
  std::size_t sites = 0;
  std::size_t factors = 0;
  std::size_t rows = 0;      // data rows across all factor files
  std::size_t accepted = 0;  // values stored in the snapshot
  std::size_t skipped = 0;   // blank cells and out-of-range years
  std::size_t orphaned = 0;  // rows referencing unknown sites
  std::size_t presence_sets = 0;
  std::vector<std::string> warnings;
  std::vector<std::string> errors;

  bool ok() const noexcept { return errors.empty(); }
};

struct IngestResult {
  std::optional<Snapshot> snapshot;  // absent iff report.errors is non-empty
  std::vector<PresenceSet> presence;
  ValidationReport report;
};

/// Reads every file of the manifest and assembles a snapshot. Data problems
/// never throw; they land in the report, and fatal ones suppress the snapshot.
IngestResult build_snapshot(const DatasetManifest& manifest);

std::string read_file(const std::filesystem::path& path);

}  // namespace sitesel
