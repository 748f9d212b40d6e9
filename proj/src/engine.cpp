#include "sitesel/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

namespace sitesel {
namespace {

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  bool lo_closed = false;
  double hi = std::numeric_limits<double>::infinity();
  bool hi_closed = false;
};

Interval accepted_interval(const Predicate& p) {
  Interval iv;
  switch (p.op) {
    case Comparator::Ge: iv.lo = p.threshold, iv.lo_closed = true; break;
    case Comparator::Gt: iv.lo = p.threshold; break;
    case Comparator::Le: iv.hi = p.threshold, iv.hi_closed = true; break;
    case Comparator::Lt: iv.hi = p.threshold; break;
    case Comparator::Within:
      iv.lo = p.threshold, iv.lo_closed = true;
      iv.hi = p.upper, iv.hi_closed = true;
      break;
  }
  return iv;
}

bool disjoint(const Interval& a, const Interval& b) {
  const bool a_lower = a.lo > b.lo || (a.lo == b.lo && !a.lo_closed);
  const double lo = a_lower ? a.lo : b.lo;
  const bool lo_closed = a.lo == b.lo ? (a.lo_closed && b.lo_closed) : (a_lower ? a.lo_closed : b.lo_closed);
  const bool a_upper = a.hi < b.hi || (a.hi == b.hi && !a.hi_closed);
  const double hi = a_upper ? a.hi : b.hi;
  const bool hi_closed = a.hi == b.hi ? (a.hi_closed && b.hi_closed) : (a_upper ? a.hi_closed : b.hi_closed);
  if (lo > hi) return true;
  return lo == hi && !(lo_closed && hi_closed);
}

struct Resolver {
  const Snapshot& snapshot;
  SiteId site;
  int year;

  std::optional<double> operator()(std::string_view factor_id) const {
    auto f = snapshot.find_factor(factor_id);
    if (!f) return std::nullopt;
    return resolve_factor(snapshot, site, *f, year);
  }
};

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

EliminationResult eliminate_at(const Resolver& resolve, std::span<const DecisionCriterion> criteria) {
  EliminationResult out;
  for (const auto& c : criteria) {
    if (c.kind != CriterionKind::MustHave || !c.predicate) continue;
    const auto& p = *c.predicate;
    auto v = resolve(p.factor_id);
    if (!v) {
      out.passed = false;
      out.reasons.push_back(c.name + ": " + p.factor_id + " unresolvable");
    } else if (!p.holds(*v)) {
      out.passed = false;
      out.reasons.push_back(c.name + ": " + p.factor_id + " = " + format_value(*v) + " violates " + p.describe());
    }
  }
  return out;
}

RatingResult rate_at(const Resolver& resolve, const QualitativeRating& rating) {
  RatingResult out;
  double total_weight = 0.0;
  double weighted = 0.0;
  for (const auto& f : rating.factors) {
    total_weight += f.weight;
    auto v = resolve(f.factor_id);
    if (!v) {
      out.missing.push_back(f.factor_id);
      continue;
    }
    weighted += f.weight * f.membership(*v);
  }
  out.value = total_weight > 0.0 ? std::clamp(weighted / total_weight, 0.0, 1.0) : 0.0;
  return out;
}

}  // namespace

std::vector<Conflict> check_consistency(const Urp& urp) {
  std::vector<Conflict> out;
  const auto& cs = urp.criteria;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (cs[i].kind != CriterionKind::MustHave || !cs[i].predicate) continue;
    for (std::size_t j = i + 1; j < cs.size(); ++j) {
      if (cs[j].kind != CriterionKind::MustHave || !cs[j].predicate) continue;
      const auto& a = *cs[i].predicate;
      const auto& b = *cs[j].predicate;
      if (a.factor_id != b.factor_id) continue;
      if (disjoint(accepted_interval(a), accepted_interval(b))) {
        out.push_back(Conflict{cs[i].name, cs[j].name,
                               "'" + cs[i].name + "' (" + a.describe() + ") and '" + cs[j].name + "' (" +
                                   b.describe() + ") cannot both hold"});
      }
    }
  }
  return out;
}

InconsistentProfileError::InconsistentProfileError(std::vector<Conflict> conflicts)
    : Error(Errc::InconsistentProfile,
            [&] {
              std::string msg;
              for (const auto& c : conflicts) msg += (msg.empty() ? "" : "; ") + c.explanation;
              return msg;
            }()),
      conflicts_(std::move(conflicts)) {}

EliminationResult eliminate(const Snapshot& snapshot, std::string_view site_code,
                            std::span<const DecisionCriterion> must_haves, int year) {
  const auto site = snapshot.hierarchy().require(site_code);
  return eliminate_at(Resolver{snapshot, site, year}, must_haves);
}

RatingResult rate(const Snapshot& snapshot, std::string_view site_code, const QualitativeRating& rating, int year) {
  const auto site = snapshot.hierarchy().require(site_code);
  return rate_at(Resolver{snapshot, site, year}, rating);
}

Recommendation score(const Snapshot& snapshot, std::string_view site_code, const Urp& urp) {
  const auto site = snapshot.hierarchy().require(site_code);
  const Resolver resolve{snapshot, site, urp.year};

  Recommendation rec;
  rec.site_code = snapshot.hierarchy().site(site).code;
  rec.site_name = snapshot.hierarchy().site(site).name;

  const auto elimination = eliminate_at(resolve, urp.criteria);
  rec.eliminated = !elimination.passed;
  rec.reasons = elimination.reasons;

  double total_weight = 0.0;
  for (const auto& c : urp.criteria) {
    if (c.kind == CriterionKind::Preference) total_weight += c.weight;
  }

  double weighted = 0.0;
  for (const auto& c : urp.criteria) {
    CriterionOutcome o{c.name, c.kind};
    if (c.kind == CriterionKind::MustHave) {
      const DecisionCriterion* one = &c;
      const auto r = eliminate_at(resolve, std::span(one, 1));
      o.rating = r.passed ? 1.0 : 0.0;
      o.missing_data = !resolve(c.predicate->factor_id).has_value();
    } else {
      const auto r = rate_at(resolve, *c.rating);
      o.rating = r.value;
      o.missing_data = !r.missing.empty();
      o.contribution = c.weight * r.value / total_weight;
      weighted += c.weight * r.value;
    }
    rec.breakdown.push_back(std::move(o));
  }
  if (!rec.eliminated && total_weight > 0.0) {
    // 12 decimals: rounding noise from weight scaling must not reorder ties
    rec.score = std::round(std::clamp(weighted / total_weight, 0.0, 1.0) * 1e12) / 1e12;
  }
  return rec;
}

std::vector<std::string> candidate_sites(const Snapshot& snapshot, const Urp& urp) {
  if (urp.focus.empty()) throw Error(Errc::EmptyFocus, "profile has no regional focus");
  const auto& hier = snapshot.hierarchy();
  const auto level = hier.levels().require(urp.target_level);
  std::set<std::string> out;
  for (const auto& key : urp.focus) {
    auto root = hier.find(key);
    if (!root) throw Error(Errc::UnknownFocus, "focus region '" + key + "' does not exist");
    for (auto id : hier.subtree_at_level(*root, level)) out.insert(hier.site(id).code);
  }
  return {out.begin(), out.end()};
}

std::vector<Recommendation> evaluate_candidates(const Snapshot& snapshot, const Urp& urp) {
  std::vector<Recommendation> out;
  for (const auto& code : candidate_sites(snapshot, urp)) out.push_back(score(snapshot, code, urp));
  return out;
}

std::vector<Recommendation> recommend(const Snapshot& snapshot, const Urp& urp, std::optional<std::size_t> top_k) {
  if (auto conflicts = check_consistency(urp); !conflicts.empty()) {
    throw InconsistentProfileError(std::move(conflicts));
  }
  auto all = evaluate_candidates(snapshot, urp);
  std::vector<Recommendation> ranked;
  ranked.reserve(all.size());
  for (auto& r : all) {
    if (!r.eliminated) ranked.push_back(std::move(r));
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Recommendation& a, const Recommendation& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.site_code < b.site_code;
  });
  if (top_k && ranked.size() > *top_k) ranked.resize(*top_k);
  return ranked;
}

}  // namespace sitesel
