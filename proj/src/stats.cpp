#include "sitesel/stats.hpp"

#include "sitesel/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace sitesel {

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(Errc::LengthMismatch,
                "vectors have lengths " + std::to_string(xs.size()) + " and " + std::to_string(ys.size()));
  }
  const std::size_t n = xs.size();
  if (n < 2) throw Error(Errc::InsufficientData, "correlation needs at least two points");

  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(Errc::ZeroVariance, "a correlated vector is constant");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

std::string_view to_string(RankSumMode mode) noexcept {
  return mode == RankSumMode::Exact ? "exact" : "normal-approximation-with-continuity-correction";
}

namespace {

struct Pooled {
  std::vector<double> ranks;  // first n1 belong to sample a
  double statistic = 0.0;
  double tie_term = 0.0;  // sum of t^3 - t over tie groups
};

Pooled pool(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(Errc::EmptySample, "rank-sum test needs two non-empty samples");
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  Pooled p;
  p.ranks = midranks(all);
  p.statistic = std::accumulate(p.ranks.begin(), p.ranks.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);

  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j] == all[i]) ++j;
    const double t = static_cast<double>(j - i);
    p.tie_term += t * t * t - t;
    i = j;
  }
  return p;
}

void fill_normal(RankSumResult& r, const Pooled& p) {
  const double n1 = static_cast<double>(r.n1);
  const double n2 = static_cast<double>(r.n2);
  const double n = n1 + n2;
  const double mean = n1 * (n + 1.0) / 2.0;
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - p.tie_term / (n * (n - 1.0)));
  const double diff = p.statistic - mean;
  if (!(var > 0.0)) {
    r.z = 0.0;
    r.p_value = 1.0;
    return;
  }
  const double corrected = std::max(std::abs(diff) - 0.5, 0.0);
  r.z = std::copysign(corrected / std::sqrt(var), diff);
  if (corrected == 0.0) r.z = 0.0;
  r.p_value = std::min(1.0, std::erfc(std::abs(r.z) / std::sqrt(2.0)));
}

}  // namespace

RankSumResult rank_sum_normal(std::span<const double> a, std::span<const double> b) {
  const auto p = pool(a, b);
  RankSumResult r;
  r.statistic = p.statistic;
  r.mode = RankSumMode::NormalApproximation;
  r.n1 = a.size();
  r.n2 = b.size();
  fill_normal(r, p);
  return r;
}

RankSumResult rank_sum_exact(std::span<const double> a, std::span<const double> b) {
  const auto p = pool(a, b);
  RankSumResult r;
  r.statistic = p.statistic;
  r.mode = RankSumMode::Exact;
  r.n1 = a.size();
  r.n2 = b.size();
  fill_normal(r, p);  // z is reported for reference; p is replaced below

  // Midranks are multiples of 1/2, so doubled ranks and sums are integers.
  const std::size_t n = p.ranks.size();
  std::vector<std::int64_t> doubled(n);
  std::int64_t max_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    doubled[i] = std::llround(2.0 * p.ranks[i]);
    max_sum += doubled[i];
  }
  const std::size_t k = r.n1;
  // ways[j][s]: number of j-element subsets whose doubled rank sum is s
  std::vector<std::vector<double>> ways(k + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
  ways[0][0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = static_cast<std::size_t>(doubled[i]);
    for (std::size_t j = std::min(k, i + 1); j >= 1; --j) {
      auto& dst = ways[j];
      const auto& src = ways[j - 1];
      for (std::size_t s = dst.size(); s-- > d;) dst[s] += src[s - d];
    }
  }

  const std::int64_t centre = static_cast<std::int64_t>(k) * static_cast<std::int64_t>(n + 1);
  const std::int64_t observed = std::llabs(std::llround(2.0 * p.statistic) - centre);
  double extreme = 0.0, total = 0.0;
  for (std::size_t s = 0; s < ways[k].size(); ++s) {
    total += ways[k][s];
    if (std::llabs(static_cast<std::int64_t>(s) - centre) >= observed) extreme += ways[k][s];
  }
  r.p_value = std::min(1.0, extreme / total);
  return r;
}

RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(Errc::EmptySample, "rank-sum test needs two non-empty samples");
  if (a.size() + b.size() <= kExactRankSumLimit) return rank_sum_exact(a, b);
  return rank_sum_normal(a, b);
}

}  // namespace sitesel
