#include "expect_error.hpp"
#include "oracles.hpp"
#include "sitesel/stats.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace sitesel;

TEST(Pearson, FrozenValues) {
  EXPECT_NEAR(pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}), 0.8, 1e-15);
  EXPECT_EQ(pearson(std::vector<double>{1, 2}, std::vector<double>{5, 3}), -1.0);
  EXPECT_EQ(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{10, 20, 30}), 1.0);
}

TEST(Pearson, Errors) {
  EXPECT_ERRC(pearson(std::vector<double>{1, 2}, std::vector<double>{1}), Errc::LengthMismatch);
  EXPECT_ERRC(pearson(std::vector<double>{1}, std::vector<double>{1}), Errc::InsufficientData);
  EXPECT_ERRC(pearson(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}), Errc::ZeroVariance);
}

TEST(PearsonProperty, SymmetricAndScaleInvariant) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(30), y(30), sx(30);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = n(rng);
      y[i] = 0.5 * x[i] + n(rng);
      sx[i] = 3.0 * x[i] + 7.0;
    }
    const double r = pearson(x, y);
    ASSERT_NEAR(pearson(y, x), r, 1e-14);
    ASSERT_NEAR(pearson(sx, y), r, 1e-12);
    ASSERT_NEAR(oracle::pearson(x, y), r, 1e-12);
  }
}

TEST(Midranks, TiesShareTheMean) {
  EXPECT_EQ(midranks(std::vector<double>{10, 20, 20, 5, 20}), (std::vector<double>{2, 4, 4, 1, 4}));
  EXPECT_EQ(midranks(std::vector<double>{}), std::vector<double>{});
}

TEST(RankSum, ExactFrozen) {
  const auto r = wilcoxon_rank_sum(std::vector<double>{1, 2}, std::vector<double>{3, 4});
  EXPECT_EQ(r.mode, RankSumMode::Exact);
  EXPECT_EQ(r.statistic, 3.0);
  EXPECT_NEAR(r.p_value, 1.0 / 3.0, 1e-15);
  EXPECT_LT(r.z, 0.0);

  const auto s = wilcoxon_rank_sum(std::vector<double>{1, 2, 4, 7}, std::vector<double>{3, 5, 6, 8, 9});
  EXPECT_EQ(s.statistic, 14.0);
  EXPECT_NEAR(s.p_value, 24.0 / 126.0, 1e-15);
}

TEST(RankSum, NormalFrozen) {
  const auto r = wilcoxon_rank_sum(std::vector<double>{1.1, 2.3, 3.7, 5.0, 8.2, 9.1, 10.4},
                                   std::vector<double>{4.4, 6.1, 7.7, 11.9, 12.5, 13.0, 14.2});
  EXPECT_EQ(r.mode, RankSumMode::NormalApproximation);
  EXPECT_EQ(r.statistic, 38.0);
  EXPECT_NEAR(r.p_value, 0.0736382701203026, 1e-12);

  const auto tied = wilcoxon_rank_sum(std::vector<double>{1, 2, 2, 3, 3, 3, 4}, std::vector<double>{3, 4, 4, 5, 5, 6, 7});
  EXPECT_EQ(tied.statistic, 31.5);
  EXPECT_NEAR(tied.p_value, 0.007659988586736321, 1e-12);
  EXPECT_EQ(tied.n1, 7u);
  EXPECT_EQ(tied.n2, 7u);
}

TEST(RankSum, ModeSwitchesAboveTwelve) {
  std::vector<double> a{1, 2, 3, 4, 5, 6}, b{7, 8, 9, 10, 11, 12};
  EXPECT_EQ(wilcoxon_rank_sum(a, b).mode, RankSumMode::Exact);
  b.push_back(13);
  EXPECT_EQ(wilcoxon_rank_sum(a, b).mode, RankSumMode::NormalApproximation);
  EXPECT_EQ(to_string(RankSumMode::Exact), "exact");
}

TEST(RankSum, DegenerateSamples) {
  EXPECT_ERRC(wilcoxon_rank_sum(std::vector<double>{}, std::vector<double>{1}), Errc::EmptySample);
  const auto same = rank_sum_normal(std::vector<double>(20, 3.0), std::vector<double>(20, 3.0));
  EXPECT_EQ(same.z, 0.0);
  EXPECT_EQ(same.p_value, 1.0);
  EXPECT_EQ(rank_sum_exact(std::vector<double>{5, 5}, std::vector<double>{5}).p_value, 1.0);
}

TEST(RankSumProperty, ExactMatchesEnumerationWithTies) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> v(0, 5);
  for (std::size_t n1 = 1; n1 < 10; ++n1) {
    for (std::size_t n2 = 1; n1 + n2 <= 10; ++n2) {
      for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a(n1), b(n2);
        for (auto& x : a) x = v(rng);
        for (auto& x : b) x = v(rng);
        const auto want = oracle::rank_sum_enumerated(a, b);
        const auto got = rank_sum_exact(a, b);
        ASSERT_EQ(got.statistic, want.w);
        ASSERT_NEAR(got.p_value, want.p, 1e-12);
      }
    }
  }
}

TEST(RankSumProperty, SwappingSamplesKeepsP) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 1);
  for (std::size_t size : {3, 6, 9, 30}) {
    std::vector<double> a(size), b(size + 2);
    for (auto& x : a) x = n(rng);
    for (auto& x : b) x = n(rng) + 0.5;
    EXPECT_NEAR(wilcoxon_rank_sum(a, b).p_value, wilcoxon_rank_sum(b, a).p_value, 1e-12);
  }
}
