#include "sitesel/fixtures.hpp"

#include "sitesel/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

namespace sitesel {
namespace {

std::string code_part(std::size_t n, int width) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%0*zu", width, n);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::FileNotFound, "cannot write '" + path.string() + "'");
  out << text;
}

const Levels& country_levels() {
  static const Levels levels({"Nation", "State", "District", "Municipality"});
  return levels;
}

/// Spreads `count` children over `parents` as evenly as possible, in order.
std::vector<std::size_t> spread(std::size_t count, std::size_t parents) {
  std::vector<std::size_t> out(parents, count / parents);
  for (std::size_t i = 0; i < count % parents; ++i) ++out[i];
  return out;
}

struct Skeleton {
  std::vector<SiteRecord> sites;
  std::vector<std::string> states;
  std::vector<std::string> districts;
  std::vector<std::string> municipalities;
  std::vector<std::size_t> district_of;  // per municipality
};

Skeleton build_skeleton(std::span<const std::pair<std::string, std::string>> states,
                        std::span<const std::size_t> districts_per_state,
                        std::span<const std::size_t> municipalities_per_state) {
  Skeleton sk;
  sk.sites.push_back(SiteRecord{std::string(kNationCode), "Deutschland", 0, ""});
  for (std::size_t s = 0; s < states.size(); ++s) {
    const auto& [state_code, state_name] = states[s];
    sk.sites.push_back(SiteRecord{state_code, state_name, 1, std::string(kNationCode)});
    sk.states.push_back(state_code);
    const auto per_district = spread(municipalities_per_state[s], districts_per_state[s]);
    for (std::size_t d = 0; d < districts_per_state[s]; ++d) {
      const auto district_code = state_code + "." + code_part(d + 1, 3);
      sk.sites.push_back(SiteRecord{district_code, state_name + " district " + code_part(d + 1, 2), 2, state_code});
      sk.districts.push_back(district_code);
      for (std::size_t m = 0; m < per_district[d]; ++m) {
        const auto code = district_code + "." + code_part(m + 1, 4);
        sk.sites.push_back(SiteRecord{code, "Gemeinde " + code.substr(3), 3, district_code});
        sk.municipalities.push_back(code);
        sk.district_of.push_back(sk.districts.size() - 1);
      }
    }
  }
  return sk;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

}  // namespace

Snapshot make_snapshot(const Dataset& data) {
  SnapshotBuilder builder(Hierarchy::build(data.levels, data.sites), data.years);
  for (const auto& f : data.factors) builder.add_factor(f);
  for (const auto& v : data.values) builder.add_value(v.site_code, v.factor_id, v.year, v.value);
  return std::move(builder).build();
}

std::filesystem::path write_dataset(const Dataset& data, const std::filesystem::path& dir) {
  DatasetManifest manifest;
  manifest.levels = data.levels;
  manifest.hierarchy = dir / "hierarchy.csv";
  write_text(manifest.hierarchy, serialize_hierarchy(data.sites, data.levels));

  for (const auto& f : data.factors) {
    std::vector<FactorValue> values;
    std::copy_if(data.values.begin(), data.values.end(), std::back_inserter(values),
                 [&](const FactorValue& v) { return v.factor_id == f.id; });
    FactorDescriptor d{f.id, f.name, f.unit, dir / "factors" / (f.id + ".csv"), data.levels.name(f.native_level),
                       f.aggregation};
    write_text(d.file, serialize_factor_values(values));
    manifest.factors.push_back(std::move(d));
  }
  for (const auto& p : data.presence) {
    PresenceDescriptor d{p.label, dir / "presence" / (p.label + ".csv")};
    write_text(d.file, serialize_presence(p));
    manifest.presence.push_back(std::move(d));
  }
  if (data.years.first != YearRange{}.first || data.years.last != YearRange{}.last) manifest.years = data.years;

  const auto path = dir / "manifest.json";
  write_text(path, manifest_to_json(manifest, dir).dump(2) + "\n");
  return path;
}

Urp threshold_profile(std::vector<std::string> focus, std::string target_level, int year, std::string factor_id,
                      Comparator op, double threshold) {
  Urp urp;
  urp.year = year;
  urp.target_level = std::move(target_level);
  urp.focus = std::move(focus);
  DecisionCriterion c;
  c.name = factor_id + " threshold";
  c.kind = CriterionKind::MustHave;
  c.predicate = Predicate{std::move(factor_id), op, threshold, 0.0};
  urp.criteria.push_back(std::move(c));
  return urp;
}

Dataset synthetic_country(const CountryOptions& o) {
  if (o.states == 0 || o.districts < o.states || o.municipalities < o.districts) {
    throw Error(Errc::SchemaViolation, "synthetic country needs states <= districts <= municipalities");
  }
  std::mt19937_64 rng(o.seed);

  std::vector<std::pair<std::string, std::string>> states;
  for (std::size_t s = 0; s < o.states; ++s) {
    states.emplace_back(std::string(kNationCode) + "." + code_part(s + 1, 2), "State " + code_part(s + 1, 2));
  }
  const auto districts_per_state = spread(o.districts, o.states);
  std::vector<std::size_t> municipalities_per_state(o.states, 0);
  {
    const auto per_district = spread(o.municipalities, o.districts);
    std::size_t d = 0;
    for (std::size_t s = 0; s < o.states; ++s) {
      for (std::size_t k = 0; k < districts_per_state[s]; ++k) municipalities_per_state[s] += per_district[d++];
    }
  }
  auto sk = build_skeleton(states, districts_per_state, municipalities_per_state);

  Dataset data;
  data.levels = country_levels();
  data.sites = sk.sites;
  data.years = YearRange{o.year - 1, o.year};
  data.factors = {
      {"inhabitants", "Inhabitants", "persons", 3, Aggregation::Additive},
      {"households", "Households", "households", 3, Aggregation::Additive},
      {"purchasing_power", "Purchasing power", "EUR", 3, Aggregation::Additive},
      {"land_price", "Land price", "EUR/m2", 3, Aggregation::Intensive},
      {"unemployment_rate", "Unemployment rate", "%", 2, Aggregation::Intensive},
      {"available_income", "Available income per inhabitant", "EUR", 1, Aggregation::Intensive},
  };

  const std::size_t n = sk.municipalities.size();
  std::lognormal_distribution<double> inhabitants_dist(std::log(4000.0), 1.1);
  std::normal_distribution<double> per_capita_dist(o.per_capita_mean, o.per_capita_sigma);
  std::uniform_real_distribution<double> household_size(1.9, 2.3);
  std::uniform_real_distribution<double> land_price(40.0, 400.0);
  std::uniform_real_distribution<double> unemployment(3.0, 11.0);
  std::normal_distribution<double> income(21500.0, 1200.0);
  std::uniform_real_distribution<double> drift(0.97, 1.01);

  std::vector<double> inhabitants(n);
  for (auto& x : inhabitants) x = std::clamp(std::round(inhabitants_dist(rng)), 80.0, 600000.0);

  // delta: sites with shifted purchasing power
  const auto delta_count = static_cast<std::size_t>(std::llround(o.shifted_share * static_cast<double>(n)));
  std::vector<bool> shifted(n, false);
  {
    const auto order = shuffled_indices(n, rng);
    for (std::size_t i = 0; i < delta_count; ++i) shifted[order[i]] = true;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& code = sk.municipalities[i];
    const double shift = shifted[i] ? o.shift_sigmas * o.per_capita_sigma : 0.0;
    const double per_capita = per_capita_dist(rng) + shift;
    const double households = std::round(inhabitants[i] / household_size(rng));
    const double price = std::round(land_price(rng) * 100.0) / 100.0;
    const double last_year = drift(rng);
    const auto add = [&](const char* id, int year, double v) { data.values.push_back({code, id, year, v}); };
    add("inhabitants", o.year, inhabitants[i]);
    add("inhabitants", o.year - 1, std::round(inhabitants[i] * last_year));
    add("households", o.year, households);
    add("households", o.year - 1, std::round(households * last_year));
    add("purchasing_power", o.year, std::round(inhabitants[i] * per_capita));
    add("purchasing_power", o.year - 1, std::round(inhabitants[i] * last_year * per_capita * 0.98));
    add("land_price", o.year, price);
  }
  for (const auto& d : sk.districts) {
    const double rate = std::round(unemployment(rng) * 10.0) / 10.0;
    data.values.push_back({d, "unemployment_rate", o.year, rate});
    data.values.push_back({d, "unemployment_rate", o.year - 1, rate + 0.2});
  }
  for (const auto& s : sk.states) {
    const double v = std::round(income(rng));
    data.values.push_back({s, "available_income", o.year, v});
    data.values.push_back({s, "available_income", o.year - 1, std::round(v * 0.98)});
  }

  // alpha: threshold rule with a fixed hit and noise share
  PresenceSet alpha{"alpha", {}};
  {
    std::vector<std::size_t> high, low;
    for (auto i : shuffled_indices(n, rng)) (inhabitants[i] >= o.threshold ? high : low).push_back(i);
    const auto hits = static_cast<std::size_t>(std::llround(o.hit_rate * static_cast<double>(high.size())));
    const auto noise = static_cast<std::size_t>(std::llround(o.noise_rate * static_cast<double>(low.size())));
    for (std::size_t k = 0; k < hits; ++k) alpha.counts[sk.municipalities[high[k]]] = 1;
    for (std::size_t k = 0; k < noise; ++k) alpha.counts[sk.municipalities[low[k]]] = 1;
  }

  PresenceSet beta{"beta", {}};
  for (std::size_t i = 0; i < n; ++i) {
    const auto stores = static_cast<int>(std::floor(inhabitants[i] / o.persons_per_beta_store));
    if (stores > 0) beta.counts[sk.municipalities[i]] = stores;
  }

  PresenceSet delta{"delta", {}};
  for (std::size_t i = 0; i < n; ++i) {
    if (shifted[i]) delta.counts[sk.municipalities[i]] = 1;
  }

  data.presence = {std::move(alpha), std::move(beta), std::move(delta)};
  return data;
}

// --- published-count fixtures ---

std::span<const PublishedCounts> published_counts() {
  static const std::array<PublishedCounts, 4> counts{{
      {"edeka", 1704, 481, 634, 364, Comparator::Ge, 5000.0},
      {"e-center", 1704, 90, 383, 80, Comparator::Gt, 10000.0},
      {"lidl", 1704, 453, 840, 428, Comparator::Ge, 5000.0},
      {"np", 1704, 256, 783, 224, Comparator::Gt, 2500.0},
  }};
  return counts;
}

const PublishedCounts& published_counts(std::string_view label) {
  for (const auto& c : published_counts()) {
    if (c.label == label) return c;
  }
  throw Error(Errc::SchemaViolation, "no published counts for chain '" + std::string(label) + "'");
}

namespace {

const std::array<std::pair<std::string, std::string>, 3> kFocusStates{{
    {"DE.03", "Niedersachsen"},
    {"DE.12", "Brandenburg"},
    {"DE.15", "Sachsen-Anhalt"},
}};

}  // namespace

Dataset published_fixture(const PublishedCounts& c, std::uint64_t seed) {
  if (c.fulfilled > c.universe || c.overlap > c.fulfilled || c.overlap > c.stores ||
      c.stores - c.overlap > c.universe - c.fulfilled) {
    throw Error(Errc::SchemaViolation, "inconsistent counts for '" + c.label + "'");
  }
  std::mt19937_64 rng(seed);

  // municipality shares roughly follow the three focus states
  const std::array<std::size_t, 3> districts{10, 6, 4};
  std::array<std::size_t, 3> municipalities{};
  municipalities[0] = c.universe * 59 / 100;
  municipalities[1] = c.universe * 26 / 100;
  municipalities[2] = c.universe - municipalities[0] - municipalities[1];
  auto sk = build_skeleton(kFocusStates, districts, municipalities);

  // Berlin sits outside the focus: one state, one district, one municipality
  sk.sites.push_back(SiteRecord{"DE.11", "Berlin", 1, std::string(kNationCode)});
  sk.sites.push_back(SiteRecord{"DE.11.000", "Berlin", 2, "DE.11"});
  sk.sites.push_back(SiteRecord{std::string(kBerlinMunicipality), "Berlin", 3, "DE.11.000"});

  Dataset data;
  data.levels = country_levels();
  data.sites = std::move(sk.sites);
  data.years = YearRange{2016, 2016};
  data.factors = {
      {"inhabitants", "Inhabitants", "persons", 3, Aggregation::Additive},
      {"available_income", "Available income per inhabitant", "EUR", 1, Aggregation::Intensive},
  };

  // smallest passing and largest failing inhabitant counts under the comparator
  const bool strict = c.op == Comparator::Gt;
  const double pass_min = strict ? c.threshold + 1.0 : c.threshold;
  const double fail_max = strict ? c.threshold : c.threshold - 1.0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto order = shuffled_indices(sk.municipalities.size(), rng);
  std::vector<std::size_t> pass(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(c.fulfilled));
  std::vector<std::size_t> fail(order.begin() + static_cast<std::ptrdiff_t>(c.fulfilled), order.end());

  std::vector<double> inhabitants(sk.municipalities.size());
  for (std::size_t k = 0; k < pass.size(); ++k) {
    // log-uniform up to 40x the threshold; the first site sits on the boundary
    inhabitants[pass[k]] = k == 0 ? pass_min : std::round(pass_min * std::pow(40.0, unit(rng)));
  }
  for (std::size_t k = 0; k < fail.size(); ++k) {
    inhabitants[fail[k]] = k == 0 ? fail_max : std::round(100.0 + (fail_max - 100.0) * unit(rng));
  }

  PresenceSet chain{c.label, {}};
  for (std::size_t k = 0; k < c.overlap; ++k) chain.counts[sk.municipalities[pass[k]]] = 1;
  for (std::size_t k = 0; k < c.stores - c.overlap; ++k) chain.counts[sk.municipalities[fail[k]]] = 1;
  chain.counts[std::string(kBerlinMunicipality)] = 1;
  data.presence.push_back(std::move(chain));

  for (std::size_t i = 0; i < sk.municipalities.size(); ++i) {
    data.values.push_back({sk.municipalities[i], "inhabitants", 2016, inhabitants[i]});
  }
  data.values.push_back({std::string(kBerlinMunicipality), "inhabitants", 2016, 3484995.0});
  const std::array<double, 3> income{21890.0, 19969.0, 19228.0};
  for (std::size_t s = 0; s < kFocusStates.size(); ++s) {
    data.values.push_back({kFocusStates[s].first, "available_income", 2016, income[s]});
  }
  data.values.push_back({"DE.11", "available_income", 2016, 22586.0});
  return data;
}

Urp published_profile(const PublishedCounts& c) {
  std::vector<std::string> focus;
  for (const auto& [code, name] : kFocusStates) focus.push_back(code);
  auto urp = threshold_profile(std::move(focus), "Municipality", 2016, "inhabitants", c.op, c.threshold);
  urp.criteria.front().name = "inhabitants";
  return urp;
}

}  // namespace sitesel
