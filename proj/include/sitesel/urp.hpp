#pragma once

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sitesel {

struct Breakpoint {
  double x = 0.0;
  double degree = 0.0;

  bool operator==(const Breakpoint&) const = default;
};

/// Piecewise-linear fuzzy membership over a factor's value range, clamped to
/// the end degrees outside the breakpoints.
class MembershipFunction {
 public:
  /// Throws UnsortedBreakpoints when x is not strictly increasing and
  /// SchemaViolation when empty or a degree lies outside [0, 1].
  explicit MembershipFunction(std::vector<Breakpoint> points);

  double operator()(double x) const noexcept;
  std::span<const Breakpoint> breakpoints() const noexcept { return points_; }

  bool operator==(const MembershipFunction&) const = default;

 private:
  std::vector<Breakpoint> points_;
};

inline double membership(const MembershipFunction& mf, double x) noexcept { return mf(x); }

/// One means-end link: how strongly a factor value satisfies the criterion.
struct RatedFactor {
  std::string factor_id;
  MembershipFunction membership;
  double weight = 1.0;

  bool operator==(const RatedFactor&) const = default;
};

struct QualitativeRating {
  std::vector<RatedFactor> factors;

  bool operator==(const QualitativeRating&) const = default;
};

enum class Comparator { Ge, Gt, Le, Lt, Within };

std::string_view to_string(Comparator op) noexcept;
std::string_view symbol(Comparator op) noexcept;

struct Predicate {
  std::string factor_id;
  Comparator op = Comparator::Ge;
  double threshold = 0.0;  // lower bound for Within
  double upper = 0.0;      // Within only; both ends inclusive

  bool holds(double value) const noexcept;
  std::string describe() const;

  bool operator==(const Predicate&) const = default;
};

enum class CriterionKind { MustHave, Preference };

struct DecisionCriterion {
  std::string name;
  CriterionKind kind = CriterionKind::MustHave;
  std::optional<Predicate> predicate;       // MustHave
  std::optional<QualitativeRating> rating;  // Preference
  double weight = 0.0;                      // Preference

  bool operator==(const DecisionCriterion&) const = default;
};

/// User requirement profile: criteria plus the regional focus whose subtrees
/// supply candidate sites at `target_level`.
struct Urp {
  int year = 0;
  std::string target_level;
  std::vector<std::string> focus;
  std::vector<DecisionCriterion> criteria;

  bool operator==(const Urp&) const = default;
};

/// Throws SchemaViolation, NonPositiveWeight, UnsortedBreakpoints.
Urp parse_urp(const nlohmann::json& document);
Urp parse_urp(std::string_view text);
nlohmann::json to_json(const Urp& urp);

}  // namespace sitesel
