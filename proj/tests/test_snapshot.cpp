#include "expect_error.hpp"
#include "oracles.hpp"
#include "random_forest.hpp"
#include "small_country.hpp"
#include "sitesel/fixtures.hpp"
#include "sitesel/snapshot.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace sitesel;

namespace {

const Snapshot& small() {
  static const Snapshot s = make_snapshot(testdata::small_country());
  return s;
}

}  // namespace

TEST(Resolve, NativeValue) {
  EXPECT_EQ(resolve_factor(small(), "N.S1.D1.M2", "inhabitants", 2016), 2000.0);
  EXPECT_EQ(resolve_factor(small(), "N.S1.D1.M2", "inhabitants", 2015), 1990.0);
}

TEST(Resolve, AdditiveSumsChildren) {
  EXPECT_EQ(resolve_factor(small(), "N.S1.D1", "inhabitants", 2016), 6000.0);
  EXPECT_EQ(resolve_factor(small(), "N.S1", "inhabitants", 2016), 45000.0);
  EXPECT_EQ(resolve_factor(small(), "N", "inhabitants", 2016), 378000.0);
}

TEST(Resolve, AdditiveNeedsEveryChild) {
  EXPECT_EQ(resolve_factor(small(), "N.S3.D2", "households", 2016), 34500.0);
  EXPECT_FALSE(resolve_factor(small(), "N.S3.D3", "households", 2016));
  EXPECT_FALSE(resolve_factor(small(), "N.S3", "households", 2016));
  EXPECT_FALSE(resolve_factor(small(), "N", "households", 2016));
  EXPECT_TRUE(resolve_factor(small(), "N.S2", "households", 2016));
}

TEST(Resolve, AdditiveLeafWithoutValue) {
  EXPECT_FALSE(resolve_factor(small(), "N.S3.D3.M3", "households", 2016));
  EXPECT_FALSE(resolve_factor(small(), "N.S1.D1.M1", "purchasing_power", 2015));
}

TEST(Resolve, IntensiveInheritsNearestAncestor) {
  EXPECT_EQ(resolve_factor(small(), "N.S2.D3.M1", "unemployment_rate", 2016), 6.5);
  EXPECT_EQ(resolve_factor(small(), "N.S2.D3", "unemployment_rate", 2016), 6.5);
  EXPECT_EQ(resolve_factor(small(), "N.S2.D1.M1", "available_income", 2016), 22000.0);
}

TEST(Resolve, IntensiveNeverAggregatesUpward) {
  EXPECT_FALSE(resolve_factor(small(), "N.S2", "unemployment_rate", 2016));
  EXPECT_FALSE(resolve_factor(small(), "N.S2.D1", "land_price", 2016));
  EXPECT_FALSE(resolve_factor(small(), "N", "available_income", 2016));
}

TEST(Resolve, Errors) {
  EXPECT_ERRC(resolve_factor(small(), "N.S9", "inhabitants", 2016), Errc::UnknownSite);
  EXPECT_ERRC(resolve_factor(small(), "N.S1", "rainfall", 2016), Errc::UnknownFactor);
  EXPECT_FALSE(resolve_factor(small(), "N.S1", "inhabitants", 1990));
}

TEST(NationalAggregate, AdditiveIsTheRootSum) {
  EXPECT_EQ(national_aggregate(small(), "inhabitants", 2016), 378000.0);
  EXPECT_ERRC(national_aggregate(small(), "households", 2016), Errc::UnresolvableAtRoot);
}

TEST(NationalAggregate, IntensiveIsInhabitantWeighted) {
  const double expected = (21000.0 * 45000 + 22000.0 * 126000 + 23000.0 * 207000) / 378000.0;
  EXPECT_NEAR(national_aggregate(small(), "available_income", 2016), expected, 1e-9);
}

TEST(PowerIndex, BaseHundredAgainstNationalPerCapita) {
  // per-capita purchasing power of municipality i is 20000 + 100 i
  const double national = 20000.0 + 100000.0 * (6930.0 - 378.0) / 378000.0;
  const PowerIndex index(small(), 2016);
  EXPECT_NEAR(index.national_per_capita(), national, 1e-9);
  EXPECT_NEAR(index("N.S1.D1.M1"), 100.0 * 20000.0 / national, 1e-9);
  EXPECT_NEAR(index("N.S3.D3.M3"), 100.0 * 22600.0 / national, 1e-9);
  EXPECT_NEAR(purchasing_power_index(small(), "N.S3.D3.M3", 2016), 100.0 * 22600.0 / national, 1e-9);
}

TEST(PowerIndex, InhabitantWeightedMeanIsHundred) {
  const PowerIndex index(small(), 2016);
  const auto& h = small().hierarchy();
  double weighted = 0, inhabitants = 0;
  for (auto id : h.at_level(3)) {
    const double inh = *resolve_factor(small(), id, small().require_factor("inhabitants"), 2016);
    weighted += inh * *index.at(id);
    inhabitants += inh;
  }
  EXPECT_NEAR(weighted / inhabitants, 100.0, 1e-9);
}

TEST(PowerIndex, MissingYear) {
  EXPECT_ERRC(PowerIndex(small(), 2015), Errc::UnresolvableAtRoot);
  EXPECT_ERRC(PowerIndex(small(), 2016, IndexConfig{"wealth", "inhabitants"}), Errc::MissingFactor);
}

TEST(PowerIndex, ZeroNationalAverage) {
  auto data = testdata::small_country();
  for (auto& v : data.values) {
    if (v.factor_id == "purchasing_power") v.value = 0.0;
  }
  EXPECT_ERRC(PowerIndex(make_snapshot(data), 2016), Errc::ZeroNationalAverage);
}

TEST(SnapshotBuilder, Errors) {
  const auto data = testdata::small_country();
  SnapshotBuilder b(Hierarchy::build(data.levels, data.sites), YearRange{2015, 2016});
  b.add_factor({"inhabitants", "Inhabitants", "", 3, Aggregation::Additive});
  EXPECT_ERRC(b.add_factor({"inhabitants", "again", "", 3, Aggregation::Additive}), Errc::DuplicateFactor);
  EXPECT_ERRC(b.add_factor({"x", "x", "", 9, Aggregation::Additive}), Errc::UnknownLevel);
  EXPECT_ERRC(b.add_value("N.S9", "inhabitants", 2016, 1), Errc::UnknownSite);
  EXPECT_ERRC(b.add_value("N.S1", "rainfall", 2016, 1), Errc::UnknownFactor);
  EXPECT_ERRC(b.add_value("N.S1", "inhabitants", 2014, 1), Errc::YearOutOfRange);
  b.add_value("N.S1", "inhabitants", 2016, 1);
  EXPECT_ERRC(b.add_value("N.S1", "inhabitants", 2016, 2), Errc::DuplicateObservation);
}

TEST(Snapshot, Introspection) {
  EXPECT_EQ(small().factors().size(), 6u);
  EXPECT_EQ(small().observed_years(), (std::vector<int>{2015, 2016}));
  const auto f = small().require_factor("unemployment_rate");
  EXPECT_EQ(small().factor(f).native_level, 2u);
  EXPECT_EQ(small().native(small().hierarchy().require("N.S1.D1"), f, 2016), 4.5);
  EXPECT_FALSE(small().native(small().hierarchy().require("N.S1.D1.M1"), f, 2016));
}

TEST(Snapshot, VersionIgnoresInsertionOrder) {
  auto data = testdata::small_country();
  const auto v1 = make_snapshot(data).version();
  std::shuffle(data.values.begin(), data.values.end(), std::mt19937_64(7));
  EXPECT_EQ(make_snapshot(data).version(), v1);
  EXPECT_EQ(v1.size(), 16u);
  data.values.front().value += 1.0;
  EXPECT_NE(make_snapshot(data).version(), v1);
}

TEST(Snapshot, ValuesAreCanonical) {
  auto data = testdata::small_country();
  std::shuffle(data.values.begin(), data.values.end(), std::mt19937_64(3));
  const auto a = make_snapshot(data).values();
  EXPECT_EQ(a, small().values());
  EXPECT_EQ(a.size(), data.values.size());
}

TEST(AdditiveMismatch, FlagsNativeParentsOffTheChildSum) {
  auto data = testdata::small_country();
  data.values.push_back({"N.S1.D1", "inhabitants", 2016, 6020.0});  // 0.33 % off
  data.values.push_back({"N.S1.D2", "inhabitants", 2016, 16000.0});  // children sum to 15000
  const auto found = additive_mismatches(make_snapshot(data));
  ASSERT_EQ(found.size(), 1u);
  EXPECT_NE(found[0].find("N.S1.D2"), std::string::npos);
}

TEST(Aggregation, Names) {
  for (auto a : {Aggregation::Additive, Aggregation::Intensive, Aggregation::None}) {
    EXPECT_EQ(parse_aggregation(to_string(a)), a);
  }
  EXPECT_FALSE(parse_aggregation("mean"));
}

// Library resolution against an explicit tree walk on random forests.
TEST(ResolveProperty, MatchesTreeWalk) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto data = testdata::random_forest(seed);
    const auto snap = make_snapshot(data);
    const auto tree = testdata::tree_of(data);
    for (const auto& s : data.sites) {
      for (const char* f : {"count", "rate"}) {
        for (int year : {2000, 2001}) {
          ASSERT_EQ(resolve_factor(snap, s.code, f, year), tree.resolve(s.code, f, year))
              << "seed " << seed << " site " << s.code << " factor " << f;
        }
      }
    }
  }
}
