#include "sitesel/analysis.hpp"

#include "sitesel/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sitesel {

ContingencyTable contingency(const SiteSet& universe, const SiteSet& store_present, const SiteSet& criteria_fulfilled) {
  for (const auto* set : {&store_present, &criteria_fulfilled}) {
    for (const auto& code : *set) {
      if (!universe.contains(code)) throw Error(Errc::SetNotInUniverse, "site '" + code + "' is outside the universe");
    }
  }
  ContingencyTable t;
  t.universe = universe.size();
  for (const auto& code : universe) {
    const bool store = store_present.contains(code);
    const bool fulfilled = criteria_fulfilled.contains(code);
    if (store && fulfilled) ++t.store_fulfilled;
    else if (store) ++t.store_unfulfilled;
    else if (fulfilled) ++t.empty_fulfilled;
    else ++t.empty_unfulfilled;
  }
  return t;
}

double overlap_percentage(const ContingencyTable& table) {
  if (table.store_total() == 0) throw Error(Errc::EmptyStoreSet, "no site with a store");
  return 100.0 * static_cast<double>(table.store_fulfilled) / static_cast<double>(table.store_total());
}

std::string format_percent(double percent) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f %%", percent);
  return buf;
}

SiteSet new_site_candidates(const SiteSet& recommended, const SiteSet& any_store_present) {
  SiteSet out;
  std::set_difference(recommended.begin(), recommended.end(), any_store_present.begin(), any_store_present.end(),
                      std::inserter(out, out.end()));
  return out;
}

std::vector<std::optional<double>> collect_values(const Snapshot& snapshot, const ValueSource& source,
                                                  std::span<const std::string> sites, int year) {
  const auto& hier = snapshot.hierarchy();
  std::vector<SiteId> ids;
  ids.reserve(sites.size());
  for (const auto& code : sites) ids.push_back(hier.require(code));

  std::vector<std::optional<double>> out(sites.size());
  if (const auto* f = std::get_if<FactorSource>(&source)) {
    const auto factor = snapshot.find_factor(f->factor_id);
    if (!factor) return out;
    for (std::size_t i = 0; i < ids.size(); ++i) out[i] = resolve_factor(snapshot, ids[i], *factor, year);
  } else if (const auto* p = std::get_if<PresenceSource>(&source)) {
    for (std::size_t i = 0; i < sites.size(); ++i) out[i] = static_cast<double>(p->presence.count(sites[i]));
  } else {
    const PowerIndex index(snapshot, year, std::get<PowerIndexSource>(source).config);
    for (std::size_t i = 0; i < ids.size(); ++i) out[i] = index.at(ids[i]);
  }
  return out;
}

CorrelationMatrix correlation_matrix(const Snapshot& snapshot, std::span<const Attribute> attributes,
                                     std::span<const std::string> sites, int year) {
  if (attributes.size() < 2) throw Error(Errc::InsufficientData, "correlation matrix needs two attributes");
  if (sites.size() < 2) throw Error(Errc::InsufficientData, "correlation matrix needs two sites");

  const std::size_t k = attributes.size();
  std::vector<std::vector<std::optional<double>>> columns;
  columns.reserve(k);
  for (const auto& a : attributes) {
    try {
      columns.push_back(collect_values(snapshot, a.source, sites, year));
    } catch (const Error& e) {
      if (e.code() == Errc::UnknownSite) throw;
      columns.emplace_back(sites.size());
    }
  }

  CorrelationMatrix m;
  for (const auto& a : attributes) m.labels.push_back(a.label);
  m.values.assign(k * k, CorrelationMatrix::kUndefined);

  auto correlate = [&](std::size_t i, std::size_t j) {
    std::vector<double> xs, ys;
    for (std::size_t s = 0; s < sites.size(); ++s) {
      if (columns[i][s] && columns[j][s]) {
        xs.push_back(*columns[i][s]);
        ys.push_back(*columns[j][s]);
      }
    }
    try {
      return pearson(xs, ys);
    } catch (const Error&) {
      return CorrelationMatrix::kUndefined;
    }
  };

  for (std::size_t i = 0; i < k; ++i) {
    m.values[i * k + i] = std::isnan(correlate(i, i)) ? CorrelationMatrix::kUndefined : 1.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      const double r = correlate(i, j);
      m.values[i * k + j] = r;
      m.values[j * k + i] = r;
    }
  }
  return m;
}

std::vector<double> default_bucket_bounds() {
  return {0.0, 2500.0, 5000.0, 10000.0, std::numeric_limits<double>::infinity()};
}

BucketReport bucket_stats(const Snapshot& snapshot, std::span<const std::string> sites, std::span<const double> bounds,
                          const ValueSource& value, int year, const std::string& inhabitants_factor) {
  if (bounds.size() < 2) throw Error(Errc::InvalidBuckets, "need at least two bucket bounds");
  for (std::size_t i = 1; i < bounds.size(); ++i) {
    if (!(bounds[i - 1] < bounds[i])) throw Error(Errc::InvalidBuckets, "bucket bounds must be strictly increasing");
  }

  const auto inhabitants = collect_values(snapshot, FactorSource{inhabitants_factor}, sites, year);
  const auto values = collect_values(snapshot, value, sites, year);

  BucketReport report;
  for (std::size_t i = 1; i < bounds.size(); ++i) report.buckets.push_back(BucketStat{bounds[i - 1], bounds[i], 0, 0, std::nullopt});
  std::vector<double> sums(report.buckets.size(), 0.0);

  for (std::size_t s = 0; s < sites.size(); ++s) {
    if (!inhabitants[s]) {
      ++report.unassigned;
      continue;
    }
    const double x = *inhabitants[s];
    // first bound strictly greater than x closes the half-open bucket
    const auto it = std::upper_bound(bounds.begin(), bounds.end(), x);
    if (it == bounds.begin() || it == bounds.end()) {
      ++report.unassigned;
      continue;
    }
    const auto b = static_cast<std::size_t>(it - bounds.begin()) - 1;
    auto& bucket = report.buckets[b];
    ++bucket.count;
    if (values[s]) {
      ++bucket.valued;
      sums[b] += *values[s];
    }
  }
  for (std::size_t b = 0; b < report.buckets.size(); ++b) {
    auto& bucket = report.buckets[b];
    if (bucket.valued > 0) bucket.mean = sums[b] / static_cast<double>(bucket.valued);
  }
  return report;
}

std::vector<GroupProfile> chain_profile(const Snapshot& snapshot, std::span<const PresenceSet> chains,
                                        std::span<const std::string> universe, int year,
                                        const ProfileConfig& config) {
  std::vector<std::optional<double>> index(universe.size());
  try {
    index = collect_values(snapshot, PowerIndexSource{config.index}, universe, year);
  } catch (const Error& e) {
    if (e.code() == Errc::UnknownSite) throw;
  }
  const auto unemployment = collect_values(snapshot, FactorSource{config.unemployment}, universe, year);

  auto profile = [&](std::string label, auto&& member) {
    GroupProfile g;
    g.label = std::move(label);
    double si = 0.0, su = 0.0;
    std::size_t ni = 0, nu = 0;
    for (std::size_t s = 0; s < universe.size(); ++s) {
      if (!member(universe[s])) continue;
      ++g.sites;
      if (index[s]) si += *index[s], ++ni;
      if (unemployment[s]) su += *unemployment[s], ++nu;
    }
    if (ni) g.mean_index = si / static_cast<double>(ni);
    if (nu) g.mean_unemployment = su / static_cast<double>(nu);
    return g;
  };

  auto any_chain = [&](const std::string& code) {
    return std::any_of(chains.begin(), chains.end(), [&](const PresenceSet& c) { return c.contains(code); });
  };

  std::vector<GroupProfile> out;
  for (const auto& chain : chains) {
    out.push_back(profile(chain.label, [&](const std::string& code) { return chain.contains(code); }));
  }
  out.push_back(profile(std::string(kAnyChainLabel), any_chain));
  out.push_back(profile(std::string(kNoChainLabel), [&](const std::string& code) { return !any_chain(code); }));
  out.push_back(profile(std::string(kAllSitesLabel), [](const std::string&) { return true; }));
  return out;
}

}  // namespace sitesel
