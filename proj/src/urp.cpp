#include "sitesel/urp.hpp"

#include "sitesel/error.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace sitesel {

MembershipFunction::MembershipFunction(std::vector<Breakpoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw Error(Errc::SchemaViolation, "membership function needs at least one breakpoint");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (!std::isfinite(p.x) || !(p.degree >= 0.0 && p.degree <= 1.0)) {
      throw Error(Errc::SchemaViolation, "breakpoint degrees must lie in [0, 1] and x must be finite");
    }
    if (i > 0 && !(points_[i - 1].x < p.x)) {
      throw Error(Errc::UnsortedBreakpoints, "breakpoint x values must be strictly increasing");
    }
  }
}

double MembershipFunction::operator()(double x) const noexcept {
  if (std::isnan(x)) return 0.0;
  if (x <= points_.front().x) return points_.front().degree;
  if (x >= points_.back().x) return points_.back().degree;
  std::size_t hi = 1;
  while (points_[hi].x < x) ++hi;
  const auto& a = points_[hi - 1];
  const auto& b = points_[hi];
  if (x == b.x) return b.degree;
  const double t = (x - a.x) / (b.x - a.x);
  return a.degree + t * (b.degree - a.degree);
}

std::string_view to_string(Comparator op) noexcept {
  switch (op) {
    case Comparator::Ge: return "ge";
    case Comparator::Gt: return "gt";
    case Comparator::Le: return "le";
    case Comparator::Lt: return "lt";
    case Comparator::Within: return "within";
  }
  return "ge";
}

std::string_view symbol(Comparator op) noexcept {
  switch (op) {
    case Comparator::Ge: return ">=";
    case Comparator::Gt: return ">";
    case Comparator::Le: return "<=";
    case Comparator::Lt: return "<";
    case Comparator::Within: return "within";
  }
  return "?";
}

bool Predicate::holds(double value) const noexcept {
  switch (op) {
    case Comparator::Ge: return value >= threshold;
    case Comparator::Gt: return value > threshold;
    case Comparator::Le: return value <= threshold;
    case Comparator::Lt: return value < threshold;
    case Comparator::Within: return value >= threshold && value <= upper;
  }
  return false;
}

std::string Predicate::describe() const {
  char buf[128];
  if (op == Comparator::Within) {
    std::snprintf(buf, sizeof buf, " within [%.10g, %.10g]", threshold, upper);
  } else {
    std::snprintf(buf, sizeof buf, " %s %.10g", std::string(symbol(op)).c_str(), threshold);
  }
  return factor_id + buf;
}

// --- JSON ---

namespace {

[[noreturn]] void schema(const std::string& msg) { throw Error(Errc::SchemaViolation, "profile: " + msg); }

const nlohmann::json& require(const nlohmann::json& obj, const char* name, const std::string& where) {
  if (!obj.is_object() || !obj.contains(name)) schema(where + " is missing '" + name + "'");
  return obj.at(name);
}

double number(const nlohmann::json& v, const std::string& what) {
  if (!v.is_number()) schema(what + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema(what + " must be finite");
  return d;
}

double positive_weight(const nlohmann::json& v, const std::string& what) {
  const double w = number(v, what);
  if (!(w > 0.0)) throw Error(Errc::NonPositiveWeight, what + " must be positive");
  return w;
}

std::string text(const nlohmann::json& v, const std::string& what) {
  if (!v.is_string()) schema(what + " must be a string");
  return v.get<std::string>();
}

Predicate parse_predicate(const nlohmann::json& j, const std::string& where) {
  Predicate p;
  p.factor_id = text(require(j, "factor", where), where + ".factor");
  const auto op = text(require(j, "op", where), where + ".op");
  if (op == "ge") p.op = Comparator::Ge;
  else if (op == "gt") p.op = Comparator::Gt;
  else if (op == "le") p.op = Comparator::Le;
  else if (op == "lt") p.op = Comparator::Lt;
  else if (op == "within") p.op = Comparator::Within;
  else schema(where + ".op '" + op + "' is not one of ge, gt, le, lt, within");

  if (p.op == Comparator::Within) {
    const auto& range = require(j, "range", where);
    if (!range.is_array() || range.size() != 2) schema(where + ".range must be [low, high]");
    p.threshold = number(range[0], where + ".range[0]");
    p.upper = number(range[1], where + ".range[1]");
    if (p.threshold > p.upper) schema(where + ".range must satisfy low <= high");
  } else {
    p.threshold = number(require(j, "threshold", where), where + ".threshold");
  }
  return p;
}

QualitativeRating parse_rating(const nlohmann::json& j, const std::string& where) {
  const auto& factors = require(j, "factors", where);
  if (!factors.is_array() || factors.empty()) schema(where + ".factors must be a non-empty array");
  QualitativeRating r;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const auto& f = factors[i];
    const auto at = where + ".factors[" + std::to_string(i) + "]";
    auto id = text(require(f, "factor", at), at + ".factor");
    const double w = f.contains("weight") ? positive_weight(f.at("weight"), at + ".weight") : 1.0;
    const auto& pts = require(f, "membership", at);
    if (!pts.is_array()) schema(at + ".membership must be an array of [x, y] pairs");
    std::vector<Breakpoint> bps;
    for (const auto& pt : pts) {
      if (!pt.is_array() || pt.size() != 2) schema(at + ".membership entries must be [x, y]");
      bps.push_back(Breakpoint{number(pt[0], at + " breakpoint x"), number(pt[1], at + " breakpoint y")});
    }
    r.factors.push_back(RatedFactor{std::move(id), MembershipFunction(std::move(bps)), w});
  }
  return r;
}

}  // namespace

Urp parse_urp(const nlohmann::json& doc) {
  if (!doc.is_object()) schema("document must be a JSON object");
  Urp urp;
  const auto& year = require(doc, "year", "document");
  if (!year.is_number_integer()) schema("year must be an integer");
  urp.year = year.get<int>();
  urp.target_level = text(require(doc, "target_level", "document"), "target_level");

  if (doc.contains("focus")) {
    const auto& focus = doc.at("focus");
    if (!focus.is_array()) schema("focus must be an array of region keys");
    for (const auto& f : focus) urp.focus.push_back(text(f, "focus entry"));
  }

  if (doc.contains("criteria")) {
    const auto& criteria = doc.at("criteria");
    if (!criteria.is_array()) schema("criteria must be an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
      const auto& c = criteria[i];
      const auto where = "criteria[" + std::to_string(i) + "]";
      DecisionCriterion dc;
      dc.name = text(require(c, "name", where), where + ".name");
      if (dc.name.empty() || !names.insert(dc.name).second) schema(where + ".name must be unique and non-empty");
      const auto kind = text(require(c, "kind", where), where + ".kind");
      if (kind == "must_have") {
        dc.kind = CriterionKind::MustHave;
        if (c.contains("weight") || c.contains("rating")) schema(where + ": must_have takes a predicate only");
        dc.predicate = parse_predicate(require(c, "predicate", where), where + ".predicate");
      } else if (kind == "preference") {
        dc.kind = CriterionKind::Preference;
        if (c.contains("predicate")) schema(where + ": preference takes a rating and weight, not a predicate");
        dc.weight = positive_weight(require(c, "weight", where), where + ".weight");
        dc.rating = parse_rating(require(c, "rating", where), where + ".rating");
      } else {
        schema(where + ".kind must be 'must_have' or 'preference'");
      }
      urp.criteria.push_back(std::move(dc));
    }
  }

  if (urp.criteria.empty() && urp.focus.empty()) schema("needs at least one criterion or a regional focus");
  return urp;
}

Urp parse_urp(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    schema(std::string("not valid JSON: ") + e.what());
  }
  return parse_urp(doc);
}

nlohmann::json to_json(const Urp& urp) {
  nlohmann::json doc;
  doc["year"] = urp.year;
  doc["target_level"] = urp.target_level;
  doc["focus"] = urp.focus;
  doc["criteria"] = nlohmann::json::array();
  for (const auto& c : urp.criteria) {
    nlohmann::json j;
    j["name"] = c.name;
    if (c.kind == CriterionKind::MustHave) {
      j["kind"] = "must_have";
      const auto& p = *c.predicate;
      nlohmann::json pj{{"factor", p.factor_id}, {"op", std::string(to_string(p.op))}};
      if (p.op == Comparator::Within) {
        pj["range"] = {p.threshold, p.upper};
      } else {
        pj["threshold"] = p.threshold;
      }
      j["predicate"] = std::move(pj);
    } else {
      j["kind"] = "preference";
      j["weight"] = c.weight;
      nlohmann::json factors = nlohmann::json::array();
      for (const auto& f : c.rating->factors) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& bp : f.membership.breakpoints()) pts.push_back({bp.x, bp.degree});
        factors.push_back({{"factor", f.factor_id}, {"weight", f.weight}, {"membership", std::move(pts)}});
      }
      j["rating"] = {{"factors", std::move(factors)}};
    }
    doc["criteria"].push_back(std::move(j));
  }
  return doc;
}

}  // namespace sitesel
