#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace sitesel {

/// Sample Pearson correlation. Throws LengthMismatch, InsufficientData (fewer
/// than two points), ZeroVariance.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// 1-based ranks with ties sharing the mean of their positions.
std::vector<double> midranks(std::span<const double> values);

enum class RankSumMode { Exact, NormalApproximation };

std::string_view to_string(RankSumMode mode) noexcept;

struct RankSumResult {
  double statistic = 0.0;  // rank sum of the first sample
  double z = 0.0;          // continuity-corrected, tie-corrected standard score
  double p_value = 1.0;    // two-sided
  RankSumMode mode = RankSumMode::Exact;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

/// Combined sample size up to which the exact null distribution is used.
inline constexpr std::size_t kExactRankSumLimit = 12;

/// Exact two-sided p from the permutation distribution of the rank sum over
/// all C(n1+n2, n1) assignments of the pooled midranks.
RankSumResult rank_sum_exact(std::span<const double> a, std::span<const double> b);
/// Normal approximation with tie-corrected variance and 0.5 continuity correction.
RankSumResult rank_sum_normal(std::span<const double> a, std::span<const double> b);
/// Wilcoxon rank-sum test; exact iff n1 + n2 <= kExactRankSumLimit. Throws EmptySample.
RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b);

}  // namespace sitesel
