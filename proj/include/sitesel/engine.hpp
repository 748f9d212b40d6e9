#pragma once

#include "sitesel/error.hpp"
#include "sitesel/snapshot.hpp"
#include "sitesel/urp.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sitesel {

/// Two must-have predicates on the same factor whose accepted intervals are
/// disjoint, so no site can satisfy both.
struct Conflict {
  std::string first;
  std::string second;
  std::string explanation;

  bool operator==(const Conflict&) const = default;
};

/// Empty result means the profile is consistent. Pairwise interval checks are
/// complete for a single factor: intervals that pairwise intersect share a point.
std::vector<Conflict> check_consistency(const Urp& urp);

class InconsistentProfileError : public Error {
 public:
  explicit InconsistentProfileError(std::vector<Conflict> conflicts);
  const std::vector<Conflict>& conflicts() const noexcept { return conflicts_; }

 private:
  std::vector<Conflict> conflicts_;
};

struct EliminationResult {
  bool passed = true;
  std::vector<std::string> reasons;
};

/// Selection by elimination. A predicate fails when it is violated or its
/// factor cannot be resolved at the site. Criteria that are not must-haves are
/// ignored. Throws UnknownSite.
EliminationResult eliminate(const Snapshot& snapshot, std::string_view site_code,
                            std::span<const DecisionCriterion> must_haves, int year);

struct RatingResult {
  double value = 0.0;
  std::vector<std::string> missing;  // factor ids that did not resolve
};

/// Weighted mean of memberships, inner weights normalized. Unresolvable
/// factors contribute 0 and are listed in `missing`. Throws UnknownSite.
RatingResult rate(const Snapshot& snapshot, std::string_view site_code, const QualitativeRating& rating, int year);

struct CriterionOutcome {
  std::string name;
  CriterionKind kind = CriterionKind::MustHave;
  double rating = 0.0;        // must-have: 1 when satisfied, else 0
  double contribution = 0.0;  // normalized outer weight * rating; 0 for must-haves
  bool missing_data = false;
};

struct Recommendation {
  std::string site_code;
  std::string site_name;
  double score = 0.0;  // in [0, 1], rounded to 12 decimals
  bool eliminated = false;
  std::vector<std::string> reasons;
  std::vector<CriterionOutcome> breakdown;  // criteria in profile order
};

/// Runs elimination and, for survivors, the weighted scoring model. Eliminated
/// sites score 0 but keep a full breakdown. Throws UnknownSite.
Recommendation score(const Snapshot& snapshot, std::string_view site_code, const Urp& urp);

/// Sites at the target level inside the focus subtrees, ordered by code.
/// Throws EmptyFocus, UnknownFocus, UnknownLevel.
std::vector<std::string> candidate_sites(const Snapshot& snapshot, const Urp& urp);

/// Scores every candidate, eliminated ones included, ordered by site code.
std::vector<Recommendation> evaluate_candidates(const Snapshot& snapshot, const Urp& urp);

/// Ranked survivors: score descending, ties by site code ascending, optionally
/// truncated. Throws InconsistentProfileError, EmptyFocus, UnknownFocus.
std::vector<Recommendation> recommend(const Snapshot& snapshot, const Urp& urp,
                                      std::optional<std::size_t> top_k = std::nullopt);

}  // namespace sitesel
