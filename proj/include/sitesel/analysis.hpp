#pragma once

#include "sitesel/presence.hpp"
#include "sitesel/snapshot.hpp"
#include "sitesel/stats.hpp"

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sitesel {

// --- overlap of existing stores with recommended sites ---

/// 2x2 cross-classification of store presence against criteria fulfilment.
struct ContingencyTable {
  std::size_t store_fulfilled = 0;    // store yes, criteria yes
  std::size_t store_unfulfilled = 0;  // store yes, criteria no
  std::size_t empty_fulfilled = 0;    // store no, criteria yes
  std::size_t empty_unfulfilled = 0;  // store no, criteria no
  std::size_t universe = 0;

  std::size_t store_total() const noexcept { return store_fulfilled + store_unfulfilled; }
  std::size_t empty_total() const noexcept { return empty_fulfilled + empty_unfulfilled; }
  std::size_t fulfilled_total() const noexcept { return store_fulfilled + empty_fulfilled; }
  std::size_t unfulfilled_total() const noexcept { return store_unfulfilled + empty_unfulfilled; }

  bool operator==(const ContingencyTable&) const = default;
};

/// Throws SetNotInUniverse.
ContingencyTable contingency(const SiteSet& universe, const SiteSet& store_present, const SiteSet& criteria_fulfilled);

/// Share of store sites that fulfil the criteria, in percent. Throws EmptyStoreSet.
double overlap_percentage(const ContingencyTable& table);

/// One-decimal display form, e.g. "94.5 %".
std::string format_percent(double percent);

/// Recommended sites with no establishment yet.
SiteSet new_site_candidates(const SiteSet& recommended, const SiteSet& any_store_present);

// --- per-site value sources ---

struct FactorSource {
  std::string factor_id;
};
struct PresenceSource {
  PresenceSet presence;
};
struct PowerIndexSource {
  IndexConfig config;
};
using ValueSource = std::variant<FactorSource, PresenceSource, PowerIndexSource>;

struct Attribute {
  std::string label;
  ValueSource source;
};

/// One entry per site; absent where the source cannot be resolved. Presence
/// sources yield establishment counts (0 where absent). Throws UnknownSite.
std::vector<std::optional<double>> collect_values(const Snapshot& snapshot, const ValueSource& source,
                                                  std::span<const std::string> sites, int year);

// --- correlation ---

struct CorrelationMatrix {
  static constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

  std::vector<std::string> labels;
  std::vector<double> values;  // row-major, NaN where undefined

  std::size_t size() const noexcept { return labels.size(); }
  double at(std::size_t row, std::size_t col) const { return values.at(row * labels.size() + col); }
};

/// Pairwise Pearson coefficients over the sites where both attributes
/// resolve. Degenerate pairs (zero variance, fewer than two shared sites)
/// become NaN instead of aborting. Throws InsufficientData for fewer than two
/// attributes or sites.
CorrelationMatrix correlation_matrix(const Snapshot& snapshot, std::span<const Attribute> attributes,
                                     std::span<const std::string> sites, int year);

// --- population buckets and chain profiles ---

/// Thresholds from the supermarket case study: 0, 2,500, 5,000, 10,000, infinity.
std::vector<double> default_bucket_bounds();

struct BucketStat {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;   // sites assigned to [lower, upper)
  std::size_t valued = 0;  // of those, sites whose value resolved
  std::optional<double> mean;
};

struct BucketReport {
  std::vector<BucketStat> buckets;
  std::size_t unassigned = 0;  // inhabitants unresolvable or outside all bounds
};

/// Throws InvalidBuckets unless bounds are strictly increasing with at least two entries.
BucketReport bucket_stats(const Snapshot& snapshot, std::span<const std::string> sites, std::span<const double> bounds,
                          const ValueSource& value, int year, const std::string& inhabitants_factor = "inhabitants");

struct ProfileConfig {
  IndexConfig index;
  std::string unemployment = "unemployment_rate";
};

struct GroupProfile {
  std::string label;
  std::size_t sites = 0;
  std::optional<double> mean_index;
  std::optional<double> mean_unemployment;
};

/// Group means per chain, then for the union of all chains ("any chain"), its
/// complement ("no chain") and the whole universe ("all").
std::vector<GroupProfile> chain_profile(const Snapshot& snapshot, std::span<const PresenceSet> chains,
                                        std::span<const std::string> universe, int year,
                                        const ProfileConfig& config = {});

inline constexpr std::string_view kAnyChainLabel = "any chain";
inline constexpr std::string_view kNoChainLabel = "no chain";
inline constexpr std::string_view kAllSitesLabel = "all";

}  // namespace sitesel
