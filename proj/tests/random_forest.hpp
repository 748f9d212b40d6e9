#pragma once

#include "sitesel/fixtures.hpp"

#include <random>
#include <string>

namespace testdata {

// Random forest with 2..5 levels, 1..3 roots and uneven branching. "count"
// is additive with integer values on leaves (a few missing), "rate" is
// intensive with values scattered over all levels.
inline sitesel::Dataset random_forest(std::uint64_t seed) {
  using namespace sitesel;
  std::mt19937_64 rng(seed);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  const int depth = uniform(2, 5);
  std::vector<std::string> names;
  for (int l = 0; l < depth; ++l) names.push_back("L" + std::to_string(l));

  Dataset data;
  data.levels = Levels(names);
  data.years = YearRange{2000, 2001};
  data.factors = {
      {"count", "Count", "", static_cast<LevelIndex>(depth - 1), Aggregation::Additive},
      {"rate", "Rate", "", 0, Aggregation::Intensive},
  };

  std::vector<std::size_t> frontier;
  const int roots = uniform(1, 3);
  for (int r = 0; r < roots; ++r) {
    data.sites.push_back({"R" + std::to_string(r), "root", 0, ""});
    frontier.push_back(data.sites.size() - 1);
  }
  for (int level = 1; level < depth; ++level) {
    std::vector<std::size_t> next;
    for (auto p : frontier) {
      const int kids = uniform(0, 4);
      for (int k = 0; k < kids; ++k) {
        const auto parent = data.sites[p].code;
        data.sites.push_back({parent + "." + std::to_string(k), "site", static_cast<LevelIndex>(level), parent});
        next.push_back(data.sites.size() - 1);
      }
    }
    frontier = std::move(next);
  }

  std::vector<bool> has_child(data.sites.size(), false);
  for (const auto& s : data.sites) {
    if (s.parent_code.empty()) continue;
    for (std::size_t i = 0; i < data.sites.size(); ++i) {
      if (data.sites[i].code == s.parent_code) has_child[i] = true;
    }
  }
  for (std::size_t i = 0; i < data.sites.size(); ++i) {
    const auto& code = data.sites[i].code;
    for (int year : {2000, 2001}) {
      if (!has_child[i] && !chance(0.05)) data.values.push_back({code, "count", year, double(uniform(0, 100000))});
      if (chance(0.25)) data.values.push_back({code, "rate", year, uniform(0, 10000) / 100.0});
    }
  }
  return data;
}

}  // namespace testdata
