#include "sitesel/snapshot.hpp"

#include "sitesel/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

namespace sitesel {

std::string_view to_string(Aggregation a) noexcept {
  switch (a) {
    case Aggregation::Additive: return "additive";
    case Aggregation::Intensive: return "intensive";
    case Aggregation::None: return "none";
  }
  return "none";
}

std::optional<Aggregation> parse_aggregation(std::string_view text) noexcept {
  if (text == "additive") return Aggregation::Additive;
  if (text == "intensive") return Aggregation::Intensive;
  if (text == "none") return Aggregation::None;
  return std::nullopt;
}

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void str(std::string_view s) {
    bytes(s.data(), s.size());
    const char sep = '\x1f';
    bytes(&sep, 1);
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::optional<FactorId> Snapshot::find_factor(std::string_view id) const {
  for (FactorId f = 0; f < factors_.size(); ++f) {
    if (factors_[f].id == id) return f;
  }
  return std::nullopt;
}

FactorId Snapshot::require_factor(std::string_view id) const {
  if (auto f = find_factor(id)) return *f;
  throw Error(Errc::UnknownFactor, "unknown factor '" + std::string(id) + "'");
}

std::optional<double> Snapshot::native(SiteId site, FactorId factor, int year) const {
  auto it = values_.find(key(factor, site, year));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> Snapshot::observed_years() const {
  std::set<int> years;
  for (const auto& [k, v] : values_) years.insert(static_cast<std::int16_t>(k & 0xffff));
  return {years.begin(), years.end()};
}

std::vector<FactorValue> Snapshot::values() const {
  std::vector<std::tuple<FactorId, SiteId, int, double>> rows;
  rows.reserve(values_.size());
  for (const auto& [k, v] : values_) {
    rows.emplace_back(static_cast<FactorId>(k >> 48), static_cast<SiteId>((k >> 16) & 0xffffffffULL),
                      static_cast<std::int16_t>(k & 0xffff), v);
  }
  std::sort(rows.begin(), rows.end());
  std::vector<FactorValue> out;
  out.reserve(rows.size());
  for (const auto& [f, s, y, v] : rows) {
    out.push_back(FactorValue{hierarchy_.site(s).code, factors_[f].id, y, v});
  }
  return out;
}

SnapshotBuilder::SnapshotBuilder(Hierarchy hierarchy, YearRange years) {
  snapshot_.hierarchy_ = std::move(hierarchy);
  snapshot_.years_ = years;
}

FactorId SnapshotBuilder::add_factor(LocationFactor factor) {
  if (snapshot_.find_factor(factor.id)) {
    throw Error(Errc::DuplicateFactor, "factor '" + factor.id + "' registered twice");
  }
  if (factor.native_level >= snapshot_.hierarchy_.levels().size()) {
    throw Error(Errc::UnknownLevel, "factor '" + factor.id + "' has an invalid native level");
  }
  if (snapshot_.factors_.size() >= 0xffff) {
    throw Error(Errc::SchemaViolation, "too many factors");
  }
  snapshot_.factors_.push_back(std::move(factor));
  return static_cast<FactorId>(snapshot_.factors_.size() - 1);
}

void SnapshotBuilder::add_value(std::string_view site_code, std::string_view factor_id, int year, double value) {
  const auto site = snapshot_.hierarchy_.require(site_code);
  const auto factor = snapshot_.require_factor(factor_id);
  if (!snapshot_.years_.contains(year) || year < INT16_MIN || year > INT16_MAX) {
    throw Error(Errc::YearOutOfRange, "year " + std::to_string(year) + " outside dataset bounds");
  }
  if (!snapshot_.values_.emplace(Snapshot::key(factor, site, year), value).second) {
    throw Error(Errc::DuplicateObservation, std::string(factor_id) + " at " + std::string(site_code) + " in " +
                                                std::to_string(year) + " observed twice");
  }
}

Snapshot SnapshotBuilder::build() && {
  Fnv1a h;
  const auto& hier = snapshot_.hierarchy_;
  for (const auto& l : hier.levels().names()) h.str(l);
  for (const auto& r : hier.records()) {
    h.str(r.code);
    h.str(r.name);
    h.u64(r.level);
    h.str(r.parent_code);
  }
  for (const auto& f : snapshot_.factors_) {
    h.str(f.id);
    h.str(f.name);
    h.str(f.unit);
    h.u64(f.native_level);
    h.str(to_string(f.aggregation));
  }
  for (const auto& v : snapshot_.values()) {
    h.str(v.factor_id);
    h.str(v.site_code);
    h.u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(v.year)));
    h.u64(std::bit_cast<std::uint64_t>(v.value));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.digest()));
  snapshot_.version_ = buf;
  return std::move(snapshot_);
}

// --- resolution ---

std::optional<double> resolve_factor(const Snapshot& snapshot, SiteId site, FactorId factor, int year) {
  if (auto v = snapshot.native(site, factor, year)) return v;

  const auto& hier = snapshot.hierarchy();
  switch (snapshot.factor(factor).aggregation) {
    case Aggregation::Additive: {
      const auto kids = hier.children(site);
      if (kids.empty()) return std::nullopt;
      double sum = 0.0;
      for (auto child : kids) {
        auto v = resolve_factor(snapshot, child, factor, year);
        if (!v) return std::nullopt;
        sum += *v;
      }
      return sum;
    }
    case Aggregation::Intensive: {
      auto cur = hier.site(site).parent;
      while (cur) {
        if (auto v = snapshot.native(*cur, factor, year)) return v;
        cur = hier.site(*cur).parent;
      }
      return std::nullopt;
    }
    case Aggregation::None:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> resolve_factor(const Snapshot& snapshot, std::string_view site_code, std::string_view factor_id,
                                     int year) {
  const auto site = snapshot.hierarchy().require(site_code);
  const auto factor = snapshot.require_factor(factor_id);
  return resolve_factor(snapshot, site, factor, year);
}

namespace {

// Shallowest native observations covering every branch below `site`.
bool collect_frontier(const Snapshot& snapshot, SiteId site, FactorId factor, int year,
                      std::vector<std::pair<SiteId, double>>& out) {
  if (auto v = snapshot.native(site, factor, year)) {
    out.emplace_back(site, *v);
    return true;
  }
  const auto kids = snapshot.hierarchy().children(site);
  if (kids.empty()) return false;
  for (auto child : kids) {
    if (!collect_frontier(snapshot, child, factor, year, out)) return false;
  }
  return true;
}

}  // namespace

double national_aggregate(const Snapshot& snapshot, std::string_view factor_id, int year,
                          std::optional<std::string_view> weight_factor_id) {
  const auto factor = snapshot.find_factor(factor_id);
  if (!factor) throw Error(Errc::UnresolvableAtRoot, "factor '" + std::string(factor_id) + "' is not registered");
  const auto& hier = snapshot.hierarchy();

  if (snapshot.factor(*factor).aggregation == Aggregation::Additive) {
    double sum = 0.0;
    for (auto root : hier.roots()) {
      auto v = resolve_factor(snapshot, root, *factor, year);
      if (!v) {
        throw Error(Errc::UnresolvableAtRoot,
                    std::string(factor_id) + " does not resolve at root '" + hier.site(root).code + "'");
      }
      sum += *v;
    }
    return sum;
  }

  std::vector<std::pair<SiteId, double>> frontier;
  for (auto root : hier.roots()) {
    if (!collect_frontier(snapshot, root, *factor, year, frontier)) {
      throw Error(Errc::UnresolvableAtRoot,
                  std::string(factor_id) + " has uncovered branches below '" + hier.site(root).code + "'");
    }
  }
  if (frontier.size() == 1) return frontier.front().second;

  const std::string_view weight_id = weight_factor_id.value_or("inhabitants");
  const auto weight = snapshot.find_factor(weight_id);
  if (!weight) {
    throw Error(Errc::UnresolvableAtRoot, "weight factor '" + std::string(weight_id) + "' is not registered");
  }
  double weighted = 0.0;
  double total = 0.0;
  for (const auto& [site, value] : frontier) {
    auto w = resolve_factor(snapshot, site, *weight, year);
    if (!w) {
      throw Error(Errc::UnresolvableAtRoot,
                  "weight '" + std::string(weight_id) + "' does not resolve at '" + hier.site(site).code + "'");
    }
    weighted += *w * value;
    total += *w;
  }
  if (total == 0.0) throw Error(Errc::UnresolvableAtRoot, "national weights sum to zero");
  return weighted / total;
}

PowerIndex::PowerIndex(const Snapshot& snapshot, int year, IndexConfig config) : snapshot_(&snapshot), year_(year) {
  auto power = snapshot.find_factor(config.purchasing_power);
  if (!power) throw Error(Errc::MissingFactor, "purchasing power factor '" + config.purchasing_power + "' missing");
  power_ = *power;
  inhabitants_ = snapshot.find_factor(config.inhabitants);
  per_capita_factor_ = snapshot.factor(power_).aggregation != Aggregation::Additive;

  if (per_capita_factor_) {
    national_ = national_aggregate(snapshot, config.purchasing_power, year, config.inhabitants);
  } else {
    if (!inhabitants_) throw Error(Errc::MissingFactor, "inhabitants factor '" + config.inhabitants + "' missing");
    const double inhabitants = national_aggregate(snapshot, config.inhabitants, year);
    if (inhabitants == 0.0) throw Error(Errc::ZeroNationalAverage, "national inhabitants are zero");
    national_ = national_aggregate(snapshot, config.purchasing_power, year) / inhabitants;
  }
  if (national_ == 0.0 || !std::isfinite(national_)) {
    throw Error(Errc::ZeroNationalAverage, "national per-inhabitant purchasing power is zero");
  }
}

std::optional<double> PowerIndex::per_capita(SiteId site) const {
  auto power = resolve_factor(*snapshot_, site, power_, year_);
  if (!power) return std::nullopt;
  if (per_capita_factor_) return power;
  auto inhabitants = resolve_factor(*snapshot_, site, *inhabitants_, year_);
  if (!inhabitants || *inhabitants == 0.0) return std::nullopt;
  return *power / *inhabitants;
}

std::optional<double> PowerIndex::at(SiteId site) const {
  auto pc = per_capita(site);
  if (!pc) return std::nullopt;
  return 100.0 * *pc / national_;
}

double PowerIndex::operator()(std::string_view site_code) const {
  const auto site = snapshot_->hierarchy().require(site_code);
  if (auto v = at(site)) return *v;
  throw Error(Errc::MissingFactor, "purchasing power per inhabitant unresolvable at '" + std::string(site_code) + "'");
}

double purchasing_power_index(const Snapshot& snapshot, std::string_view site_code, int year,
                              const IndexConfig& config) {
  snapshot.hierarchy().require(site_code);
  return PowerIndex(snapshot, year, config)(site_code);
}

std::vector<std::string> additive_mismatches(const Snapshot& snapshot, double relative_tolerance) {
  std::vector<std::string> out;
  const auto& hier = snapshot.hierarchy();
  for (const auto& v : snapshot.values()) {
    const auto factor = *snapshot.find_factor(v.factor_id);
    if (snapshot.factor(factor).aggregation != Aggregation::Additive) continue;
    const auto site = *hier.find(v.site_code);
    const auto kids = hier.children(site);
    if (kids.empty()) continue;
    double sum = 0.0;
    bool complete = true;
    for (auto child : kids) {
      auto c = resolve_factor(snapshot, child, factor, v.year);
      if (!c) {
        complete = false;
        break;
      }
      sum += *c;
    }
    if (!complete) continue;
    if (std::abs(v.value - sum) > relative_tolerance * std::abs(v.value)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.10g vs child sum %.10g", v.value, sum);
      out.push_back(v.factor_id + " at " + v.site_code + " (" + std::to_string(v.year) + "): native " + buf);
    }
  }
  return out;
}

}  // namespace sitesel
