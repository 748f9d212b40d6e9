#include "sitesel/report.hpp"

#include "sitesel/csv.hpp"
#include "sitesel/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sitesel {
namespace {

nlohmann::json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::json optional_number(const std::optional<double>& v) {
  if (!v) return nullptr;
  return number_or_null(*v);
}

}  // namespace

std::string format_number(double v, int precision) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

nlohmann::json to_json(const Recommendation& rec) {
  nlohmann::json breakdown = nlohmann::json::array();
  for (const auto& o : rec.breakdown) {
    breakdown.push_back({{"criterion", o.name},
                         {"kind", o.kind == CriterionKind::MustHave ? "must_have" : "preference"},
                         {"rating", o.rating},
                         {"contribution", o.contribution},
                         {"missing_data", o.missing_data}});
  }
  return {{"site", rec.site_code},         {"name", rec.site_name},       {"score", rec.score},
          {"eliminated", rec.eliminated}, {"reasons", rec.reasons}, {"breakdown", std::move(breakdown)}};
}

nlohmann::json to_json(const std::vector<Recommendation>& recs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : recs) out.push_back(to_json(r));
  return out;
}

nlohmann::json to_json(const Conflict& c) {
  return {{"first", c.first}, {"second", c.second}, {"explanation", c.explanation}};
}

nlohmann::json to_json(const ContingencyTable& t) {
  return {{"store_fulfilled", t.store_fulfilled},
          {"store_unfulfilled", t.store_unfulfilled},
          {"empty_fulfilled", t.empty_fulfilled},
          {"empty_unfulfilled", t.empty_unfulfilled},
          {"universe", t.universe}};
}

nlohmann::json to_json(const CorrelationMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(number_or_null(m.at(i, j)));
    rows.push_back(std::move(row));
  }
  return {{"labels", m.labels}, {"matrix", std::move(rows)}};
}

nlohmann::json to_json(const RankSumResult& r) {
  return {{"statistic", r.statistic}, {"z", number_or_null(r.z)},      {"p_value", r.p_value},
          {"mode", std::string(to_string(r.mode))}, {"n1", r.n1}, {"n2", r.n2}};
}

nlohmann::json to_json(const BucketReport& report) {
  nlohmann::json buckets = nlohmann::json::array();
  for (const auto& b : report.buckets) {
    buckets.push_back({{"lower", number_or_null(b.lower)},
                       {"upper", number_or_null(b.upper)},
                       {"count", b.count},
                       {"valued", b.valued},
                       {"mean", optional_number(b.mean)}});
  }
  return {{"buckets", std::move(buckets)}, {"unassigned", report.unassigned}};
}

nlohmann::json to_json(const GroupProfile& g) {
  return {{"group", g.label},
          {"sites", g.sites},
          {"mean_purchasing_power_index", optional_number(g.mean_index)},
          {"mean_unemployment_rate", optional_number(g.mean_unemployment)}};
}

nlohmann::json to_json(const ValidationReport& r) {
  return {{"sites", r.sites},
          {"factors", r.factors},
          {"rows", r.rows},
          {"accepted", r.accepted},
          {"skipped", r.skipped},
          {"orphaned", r.orphaned},
          {"presence_sets", r.presence_sets},
          {"warnings", r.warnings},
          {"errors", r.errors}};
}

EvaluationReport evaluate_chains(const Snapshot& snapshot, std::span<const PresenceSet> chains,
                                 std::span<const Urp> profiles) {
  if (chains.size() != profiles.size()) {
    throw Error(Errc::SchemaViolation, "every chain needs exactly one profile");
  }
  EvaluationReport report;
  if (chains.empty()) return report;

  const auto candidates = candidate_sites(snapshot, profiles.front());
  const SiteSet universe(candidates.begin(), candidates.end());
  report.universe = universe.size();

  SiteSet occupied;
  std::vector<SiteSet> stores;
  for (const auto& chain : chains) {
    SiteSet s;
    for (const auto& [code, n] : chain.counts) {
      if (universe.contains(code)) s.insert(code);
    }
    occupied.insert(s.begin(), s.end());
    stores.push_back(std::move(s));
  }

  for (std::size_t i = 0; i < chains.size(); ++i) {
    const auto& urp = profiles[i];
    if (candidate_sites(snapshot, urp) != candidates) {
      throw Error(Errc::SchemaViolation, "profiles evaluated together must share focus and target level");
    }
    if (auto conflicts = check_consistency(urp); !conflicts.empty()) {
      throw InconsistentProfileError(std::move(conflicts));
    }
    SiteSet fulfilled;
    for (const auto& rec : evaluate_candidates(snapshot, urp)) {
      if (!rec.eliminated) fulfilled.insert(rec.site_code);
    }
    ChainEvaluation ev;
    ev.label = chains[i].label;
    ev.table = contingency(universe, stores[i], fulfilled);
    if (ev.table.store_total() > 0) ev.overlap = overlap_percentage(ev.table);
    // recommended: fulfilling sites this chain does not serve yet
    const auto recommended = new_site_candidates(fulfilled, stores[i]);
    ev.recommended = recommended.size();
    ev.without_markets = new_site_candidates(recommended, occupied).size();
    report.stores += ev.table.store_total();
    report.overlapping += ev.table.store_fulfilled;
    report.chains.push_back(std::move(ev));
  }
  if (report.stores > 0) {
    report.overall_overlap = 100.0 * static_cast<double>(report.overlapping) / static_cast<double>(report.stores);
  }
  return report;
}

nlohmann::json to_json(const EvaluationReport& report) {
  nlohmann::json chains = nlohmann::json::array();
  for (const auto& c : report.chains) {
    chains.push_back({{"chain", c.label},
                      {"contingency", to_json(c.table)},
                      {"overlap_percent", optional_number(c.overlap)},
                      {"overlap_display", c.overlap ? format_percent(*c.overlap) : "NA"},
                      {"recommended", c.recommended},
                      {"recommended_without_markets", c.without_markets}});
  }
  return {{"universe", report.universe},
          {"chains", std::move(chains)},
          {"stores", report.stores},
          {"overlapping", report.overlapping},
          {"overall_overlap_percent", optional_number(report.overall_overlap)},
          {"overall_overlap_display", report.overall_overlap ? format_percent(*report.overall_overlap) : "NA"}};
}

std::string matrix_csv(const CorrelationMatrix& m) {
  std::vector<std::string> header{"attribute"};
  header.insert(header.end(), m.labels.begin(), m.labels.end());
  std::string out = csv::join(header) + "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::vector<std::string> row{m.labels[i]};
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(format_number(m.at(i, j), 6));
    out += csv::join(row) + "\n";
  }
  return out;
}

std::string buckets_csv(const std::vector<std::pair<std::string, BucketReport>>& rows) {
  std::string out = "group,lower,upper,count,valued,mean\n";
  for (const auto& [label, report] : rows) {
    for (const auto& b : report.buckets) {
      out += csv::join({label, format_number(b.lower, 0), std::isinf(b.upper) ? "inf" : format_number(b.upper, 0),
                        std::to_string(b.count), std::to_string(b.valued), b.mean ? format_number(*b.mean, 6) : "NA"});
      out += "\n";
    }
  }
  return out;
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (std::size_t i = 0; i < rows[r].size(); ++i) {
      if (i) line += "  ";
      const auto& cell = rows[r][i];
      // left-align the first column, right-align the rest
      if (i == 0) {
        line += cell + std::string(widths[i] - cell.size(), ' ');
      } else {
        line += std::string(widths[i] - cell.size(), ' ') + cell;
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t i = 0; i < widths.size(); ++i) total += widths[i] + (i ? 2 : 0);
      out += std::string(total, '-') + "\n";
    }
  }
  return out;
}

}  // namespace sitesel
