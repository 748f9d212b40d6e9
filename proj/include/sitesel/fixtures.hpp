#pragma once

#include "sitesel/hierarchy.hpp"
#include "sitesel/ingest.hpp"
#include "sitesel/presence.hpp"
#include "sitesel/snapshot.hpp"
#include "sitesel/urp.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sitesel {

/// In-memory dataset: everything a manifest describes, before ingestion.
struct Dataset {
  Levels levels = Levels::defaults();
  std::vector<SiteRecord> sites;
  std::vector<LocationFactor> factors;
  std::vector<FactorValue> values;
  std::vector<PresenceSet> presence;
  YearRange years;
};

/// Builds the snapshot directly, without going through files.
Snapshot make_snapshot(const Dataset& data);

/// Writes manifest.json, hierarchy.csv, factors/<id>.csv and
/// presence/<label>.csv under `dir`. Returns the manifest path.
std::filesystem::path write_dataset(const Dataset& data, const std::filesystem::path& dir);

/// Profile with one must-have on `factor_id` and no preferences.
Urp threshold_profile(std::vector<std::string> focus, std::string target_level, int year, std::string factor_id,
                      Comparator op, double threshold);

// --- synthetic country ---

struct CountryOptions {
  std::uint64_t seed = 2016;
  std::size_t states = 3;
  std::size_t districts = 12;
  std::size_t municipalities = 200;
  int year = 2016;
  double threshold = 5000.0;      // placement rule of the "alpha" chain
  double hit_rate = 0.9;          // share of qualifying sites that get an alpha store
  double noise_rate = 0.1;        // share of non-qualifying sites that get one anyway
  double per_capita_mean = 22000.0;
  double per_capita_sigma = 1500.0;
  double shift_sigmas = 2.0;      // purchasing power shift of "delta" sites
  double shifted_share = 0.3;     // share of municipalities with a delta store
  double persons_per_beta_store = 2500.0;
};

/// Levels Nation/State/District/Municipality. Factors: inhabitants,
/// households, purchasing_power (additive, municipality), land_price
/// (intensive, municipality, independent noise), unemployment_rate
/// (intensive, district), available_income (intensive, state); years
/// `year - 1` and `year`. Chains:
///   alpha: exactly round(hit_rate * qualifying) sites with inhabitants >=
///          threshold plus round(noise_rate * others) below it;
///   beta:  floor(inhabitants / persons_per_beta_store) stores per site;
///   delta: round(shifted_share * municipalities) sites whose per-capita
///          purchasing power is drawn shift_sigmas higher.
Dataset synthetic_country(const CountryOptions& options = {});

inline constexpr std::string_view kNationCode = "DE";

// --- published-count fixtures ---

/// Published classification counts for one supermarket chain.
struct PublishedCounts {
  std::string label;
  std::size_t universe = 0;
  std::size_t stores = 0;
  std::size_t fulfilled = 0;
  std::size_t overlap = 0;  // stores at sites fulfilling the criterion
  Comparator op = Comparator::Ge;
  double threshold = 0.0;
};

std::span<const PublishedCounts> published_counts();
/// Throws SchemaViolation for an unknown label.
const PublishedCounts& published_counts(std::string_view label);

/// A country whose focus states hold `universe` municipalities with
/// inhabitants placed so that exactly `fulfilled` satisfy the chain's
/// criterion and exactly `overlap` of its `stores` sit on those. A Berlin
/// state outside the focus carries the published Berlin figures.
Dataset published_fixture(const PublishedCounts& counts, std::uint64_t seed = 2016);
Urp published_profile(const PublishedCounts& counts);

inline constexpr std::string_view kBerlinMunicipality = "DE.11.000.0000";

}  // namespace sitesel
