#pragma once

#include "sitesel/hierarchy.hpp"

#include <climits>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sitesel {

/// How a location factor propagates through the hierarchy.
///  - Additive values sum upward (inhabitants of a district = sum over its municipalities).
///  - Intensive values are inherited downward from the nearest ancestor (average income).
///  - None: only native observations are visible.
enum class Aggregation { Additive, Intensive, None };

std::string_view to_string(Aggregation a) noexcept;
std::optional<Aggregation> parse_aggregation(std::string_view text) noexcept;

struct LocationFactor {
  std::string id;
  std::string name;
  std::string unit;
  LevelIndex native_level = 0;
  Aggregation aggregation = Aggregation::None;

  bool operator==(const LocationFactor&) const = default;
};

struct FactorValue {
  std::string site_code;
  std::string factor_id;
  int year = 0;
  double value = 0.0;

  bool operator==(const FactorValue&) const = default;
};

struct YearRange {
  int first = INT_MIN;
  int last = INT_MAX;

  bool contains(int year) const noexcept { return year >= first && year <= last; }
  bool operator==(const YearRange&) const = default;
};

using FactorId = std::uint32_t;

/// Hierarchy plus factor observations, frozen once built. All const member
/// functions are safe to call concurrently.
class Snapshot {
 public:
  const Hierarchy& hierarchy() const noexcept { return hierarchy_; }
  std::span<const LocationFactor> factors() const noexcept { return factors_; }
  const LocationFactor& factor(FactorId id) const { return factors_.at(id); }
  std::optional<FactorId> find_factor(std::string_view id) const;
  /// Throws UnknownFactor.
  FactorId require_factor(std::string_view id) const;

  std::optional<double> native(SiteId site, FactorId factor, int year) const;
  std::size_t value_count() const noexcept { return values_.size(); }
  YearRange years() const noexcept { return years_; }
  /// Years with at least one observation, ascending.
  std::vector<int> observed_years() const;

  /// Every native observation in canonical order (factor, site, year).
  std::vector<FactorValue> values() const;

  /// Content hash of hierarchy, factor metadata and values.
  const std::string& version() const noexcept { return version_; }

 private:
  friend class SnapshotBuilder;

  static std::uint64_t key(FactorId f, SiteId s, int year) noexcept {
    return (std::uint64_t{f} << 48) ^ (std::uint64_t{s} << 16) ^ static_cast<std::uint16_t>(year);
  }

  Hierarchy hierarchy_;
  YearRange years_;
  std::vector<LocationFactor> factors_;
  std::unordered_map<std::uint64_t, double> values_;
  std::string version_;
};

/// Single-writer assembly of a Snapshot.
class SnapshotBuilder {
 public:
  explicit SnapshotBuilder(Hierarchy hierarchy, YearRange years = {});

  const Hierarchy& hierarchy() const noexcept { return snapshot_.hierarchy_; }

  /// Throws DuplicateFactor, UnknownLevel.
  FactorId add_factor(LocationFactor factor);
  /// Throws UnknownSite, UnknownFactor, YearOutOfRange, DuplicateObservation.
  void add_value(std::string_view site_code, std::string_view factor_id, int year, double value);

  Snapshot build() &&;

 private:
  Snapshot snapshot_;
};

/// Value of `factor_id` at `site_code` for `year`: the native observation if
/// there is one, otherwise the aggregation rule of the factor. Additive
/// parents resolve only when every child resolves. Throws UnknownSite,
/// UnknownFactor.
std::optional<double> resolve_factor(const Snapshot& snapshot, std::string_view site_code, std::string_view factor_id,
                                     int year);
std::optional<double> resolve_factor(const Snapshot& snapshot, SiteId site, FactorId factor, int year);

/// Country-wide figure: the sum over roots for Additive factors, otherwise the
/// mean of the shallowest native values weighted by `weight_factor_id`
/// (inhabitants by default). Throws UnresolvableAtRoot.
double national_aggregate(const Snapshot& snapshot, std::string_view factor_id, int year,
                          std::optional<std::string_view> weight_factor_id = std::nullopt);

struct IndexConfig {
  std::string purchasing_power = "purchasing_power";
  std::string inhabitants = "inhabitants";
};

/// Purchasing power per inhabitant relative to the national per-inhabitant
/// average, on base 100. The national average is computed once per instance.
class PowerIndex {
 public:
  /// Throws MissingFactor, ZeroNationalAverage, UnresolvableAtRoot.
  PowerIndex(const Snapshot& snapshot, int year, IndexConfig config = {});

  double national_per_capita() const noexcept { return national_; }
  /// Per-inhabitant purchasing power at the site, if resolvable.
  std::optional<double> per_capita(SiteId site) const;
  std::optional<double> at(SiteId site) const;
  /// Throws MissingFactor when the site's value cannot be resolved.
  double operator()(std::string_view site_code) const;

 private:
  const Snapshot* snapshot_;
  int year_;
  FactorId power_;
  std::optional<FactorId> inhabitants_;
  bool per_capita_factor_;
  double national_ = 0.0;
};

double purchasing_power_index(const Snapshot& snapshot, std::string_view site_code, int year,
                              const IndexConfig& config = {});

/// Native Additive parents whose value differs from the sum of their
/// children's resolved values by more than `relative_tolerance`.
std::vector<std::string> additive_mismatches(const Snapshot& snapshot, double relative_tolerance = 0.005);

}  // namespace sitesel
