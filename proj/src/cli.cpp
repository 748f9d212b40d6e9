#include "sitesel/cli.hpp"

#include "sitesel/analysis.hpp"
#include "sitesel/csv.hpp"
#include "sitesel/engine.hpp"
#include "sitesel/error.hpp"
#include "sitesel/fixtures.hpp"
#include "sitesel/ingest.hpp"
#include "sitesel/report.hpp"
#include "sitesel/service.hpp"
#include "sitesel/stats.hpp"
#include "sitesel/urp.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

namespace sitesel::cli {
namespace {

enum class Format { Table, Csv, Json };

struct Common {
  std::string manifest;
  Format format = Format::Table;
  std::optional<int> year;
  bool latest = false;
};

struct Loaded {
  Snapshot snapshot;
  std::vector<PresenceSet> presence;
  ValidationReport report;
};

// Ingestion failures are fatal everywhere except `ingest` itself.
Loaded load(const std::string& manifest) {
  auto result = build_snapshot(load_manifest(manifest));
  if (!result.snapshot) {
    std::string msg = "ingestion failed";
    for (const auto& e : result.report.errors) msg += "\n  " + e;
    throw Error(Errc::SchemaViolation, msg);
  }
  return {std::move(*result.snapshot), std::move(result.presence), std::move(result.report)};
}

int resolve_year(const Common& c, const Snapshot& snapshot, std::optional<int> fallback = std::nullopt) {
  if (c.year) return *c.year;
  if (c.latest) {
    const auto years = snapshot.observed_years();
    if (years.empty()) throw Error(Errc::InsufficientData, "snapshot has no observations");
    return years.back();
  }
  if (fallback) return *fallback;
  throw Error(Errc::SchemaViolation, "pass --year or --latest");
}

Urp read_urp(const std::string& path) {
  const auto text = read_file(path);
  return parse_urp(std::string_view(text));
}

const PresenceSet& require_presence(const Loaded& data, const std::string& label) {
  for (const auto& p : data.presence) {
    if (p.label == label) return p;
  }
  throw Error(Errc::UnknownFactor, "no presence set '" + label + "' in the manifest");
}

void add_common(CLI::App* cmd, Common& c, bool needs_year) {
  cmd->add_option("-m,--manifest", c.manifest, "Dataset manifest (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("-f,--format", c.format, "Output format")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Format>{{"table", Format::Table}, {"csv", Format::Csv}, {"json", Format::Json}}));
  if (needs_year) {
    auto* year = cmd->add_option("-y,--year", c.year, "Data year");
    cmd->add_flag("--latest", c.latest, "Use the latest observed year")->excludes(year);
  }
}

std::string site_count(std::size_t n) { return std::to_string(n); }

// --- ingest ---

int cmd_ingest(const Common& c, bool strict, std::ostream& out) {
  const auto result = build_snapshot(load_manifest(c.manifest));
  const auto& r = result.report;
  if (c.format == Format::Json) {
    auto doc = to_json(r);
    doc["snapshot_version"] = result.snapshot ? nlohmann::json(result.snapshot->version()) : nlohmann::json(nullptr);
    out << doc.dump(2) << "\n";
  } else {
    std::vector<std::vector<std::string>> rows{{"item", "value"},
                                               {"sites", site_count(r.sites)},
                                               {"factors", site_count(r.factors)},
                                               {"rows", site_count(r.rows)},
                                               {"accepted", site_count(r.accepted)},
                                               {"skipped", site_count(r.skipped)},
                                               {"orphaned", site_count(r.orphaned)},
                                               {"presence sets", site_count(r.presence_sets)},
                                               {"warnings", site_count(r.warnings.size())},
                                               {"errors", site_count(r.errors.size())}};
    if (result.snapshot) rows.push_back({"version", result.snapshot->version()});
    out << render_table(rows);
    for (const auto& w : r.warnings) out << "warning: " << w << "\n";
    for (const auto& e : r.errors) out << "error: " << e << "\n";
  }
  if (!r.ok()) return 2;
  if (strict && !r.warnings.empty()) return 1;
  return 0;
}

// --- recommend ---

int cmd_recommend(const Common& c, const std::string& urp_path, std::optional<std::size_t> top, std::ostream& out) {
  const auto data = load(c.manifest);
  auto urp = read_urp(urp_path);
  urp.year = resolve_year(c, data.snapshot, urp.year);
  const auto ranked = recommend(data.snapshot, urp, top);

  if (c.format == Format::Json) {
    out << nlohmann::json{{"snapshot_version", data.snapshot.version()}, {"year", urp.year}, {"results", to_json(ranked)}}
               .dump(2)
        << "\n";
    return 0;
  }
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"rank", "site", "name", "score"};
  for (const auto& cr : urp.criteria) header.push_back(cr.name);
  rows.push_back(header);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& r = ranked[i];
    std::vector<std::string> row{std::to_string(i + 1), r.site_code, r.site_name, format_number(r.score, 4)};
    for (const auto& o : r.breakdown) row.push_back(format_number(o.rating, 3) + (o.missing_data ? "*" : ""));
    rows.push_back(std::move(row));
  }
  if (c.format == Format::Csv) {
    for (const auto& row : rows) out << csv::join(row) << "\n";
  } else {
    out << render_table(rows);
  }
  return 0;
}

// --- evaluate ---

int cmd_evaluate(const Common& c, const std::string& urp_path, const std::vector<std::string>& chain_urps,
                 const std::vector<std::string>& chains, std::ostream& out) {
  const auto data = load(c.manifest);

  std::vector<PresenceSet> sets;
  std::vector<Urp> profiles;
  auto with_year = [&](Urp urp) {
    urp.year = resolve_year(c, data.snapshot, urp.year);
    return urp;
  };
  if (!chain_urps.empty()) {
    for (const auto& entry : chain_urps) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos) throw Error(Errc::SchemaViolation, "--chain-urp expects label=path");
      sets.push_back(require_presence(data, entry.substr(0, eq)));
      profiles.push_back(with_year(read_urp(entry.substr(eq + 1))));
    }
  } else {
    if (urp_path.empty()) throw Error(Errc::SchemaViolation, "pass --urp or --chain-urp");
    const auto urp = with_year(read_urp(urp_path));
    if (chains.empty()) {
      sets = data.presence;
    } else {
      for (const auto& label : chains) sets.push_back(require_presence(data, label));
    }
    profiles.assign(sets.size(), urp);
  }
  if (sets.empty()) throw Error(Errc::InsufficientData, "no presence sets to evaluate");

  const auto report = evaluate_chains(data.snapshot, sets, profiles);
  if (c.format == Format::Json) {
    auto doc = to_json(report);
    doc["snapshot_version"] = data.snapshot.version();
    out << doc.dump(2) << "\n";
    return 0;
  }

  std::vector<std::vector<std::string>> rows{{"chain", "store+fulfilled", "store+unfulfilled", "empty+fulfilled",
                                              "empty+unfulfilled", "overlap", "recommended", "without markets"}};
  for (const auto& ev : report.chains) {
    const auto& t = ev.table;
    rows.push_back({ev.label, std::to_string(t.store_fulfilled), std::to_string(t.store_unfulfilled),
                    std::to_string(t.empty_fulfilled), std::to_string(t.empty_unfulfilled),
                    ev.overlap ? format_percent(*ev.overlap) : "NA", std::to_string(ev.recommended),
                    std::to_string(ev.without_markets)});
  }
  if (c.format == Format::Csv) {
    for (const auto& row : rows) out << csv::join(row) << "\n";
    return 0;
  }
  out << "universe: " << report.universe << " sites\n";
  out << render_table(rows);
  out << "overall: " << report.overlapping << " of " << report.stores << " store sites fulfil the criteria ("
      << (report.overall_overlap ? format_percent(*report.overall_overlap) : "NA") << ")\n";
  return 0;
}

// --- correlate ---

struct Selection {
  std::string level = "Municipality";
  std::optional<std::string> under;
};

std::vector<Attribute> attributes_from(const Loaded& data, const std::vector<std::string>& factors,
                                       const std::vector<std::string>& presence, bool index) {
  std::vector<Attribute> out;
  for (const auto& label : presence) out.push_back({label, PresenceSource{require_presence(data, label)}});
  for (const auto& id : factors) {
    data.snapshot.require_factor(id);
    out.push_back({id, FactorSource{id}});
  }
  if (index) out.push_back({"purchasing_power_index", PowerIndexSource{}});
  return out;
}

int cmd_correlate(const Common& c, const Selection& sel, const std::vector<std::string>& factors,
                  std::vector<std::string> presence, bool all_presence, bool index, std::ostream& out) {
  const auto data = load(c.manifest);
  const int year = resolve_year(c, data.snapshot);
  if (all_presence) {
    for (const auto& p : data.presence) presence.push_back(p.label);
  }
  const auto attributes = attributes_from(data, factors, presence, index);
  const auto sites = sites_at(data.snapshot.hierarchy(), sel.level, sel.under);
  const auto matrix = correlation_matrix(data.snapshot, attributes, sites, year);

  if (c.format == Format::Json) {
    auto doc = to_json(matrix);
    doc["snapshot_version"] = data.snapshot.version();
    doc["year"] = year;
    doc["sites"] = sites.size();
    out << doc.dump(2) << "\n";
  } else if (c.format == Format::Csv) {
    out << matrix_csv(matrix);
  } else {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{""};
    header.insert(header.end(), matrix.labels.begin(), matrix.labels.end());
    rows.push_back(header);
    for (std::size_t i = 0; i < matrix.size(); ++i) {
      std::vector<std::string> row{matrix.labels[i]};
      for (std::size_t j = 0; j < matrix.size(); ++j) row.push_back(format_number(matrix.at(i, j), 2));
      rows.push_back(std::move(row));
    }
    out << render_table(rows);
  }
  return 0;
}

// --- profile ---

int cmd_profile(const Common& c, const Selection& sel, std::vector<double> bounds, const std::string& value,
                std::ostream& out) {
  const auto data = load(c.manifest);
  const int year = resolve_year(c, data.snapshot);
  const auto sites = sites_at(data.snapshot.hierarchy(), sel.level, sel.under);
  if (bounds.empty()) bounds = default_bucket_bounds();

  ValueSource source = PowerIndexSource{};
  if (value != "index") {
    data.snapshot.require_factor(value);
    source = FactorSource{value};
  }

  auto members = [&](const std::string& label, auto&& keep) {
    std::vector<std::string> s;
    std::copy_if(sites.begin(), sites.end(), std::back_inserter(s), keep);
    return std::pair{label, s};
  };
  auto any_chain = [&](const std::string& code) {
    return std::any_of(data.presence.begin(), data.presence.end(), [&](const PresenceSet& p) { return p.contains(code); });
  };

  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
  for (const auto& p : data.presence) {
    groups.push_back(members(p.label, [&](const std::string& code) { return p.contains(code); }));
  }
  groups.push_back(members(std::string(kAnyChainLabel), any_chain));
  groups.push_back(members(std::string(kNoChainLabel), [&](const std::string& code) { return !any_chain(code); }));
  groups.push_back(members(std::string(kAllSitesLabel), [](const std::string&) { return true; }));

  std::vector<std::pair<std::string, BucketReport>> buckets;
  for (const auto& [label, members_of] : groups) {
    buckets.emplace_back(label, bucket_stats(data.snapshot, members_of, bounds, source, year));
  }
  const auto profiles = chain_profile(data.snapshot, data.presence, sites, year);

  // each chain's sites against sites without any chain
  const auto values = collect_values(data.snapshot, source, sites, year);
  std::vector<std::pair<std::string, std::optional<RankSumResult>>> tests;
  for (const auto& p : data.presence) {
    std::vector<double> a, b;
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (!values[i]) continue;
      if (p.contains(sites[i])) a.push_back(*values[i]);
      else if (!any_chain(sites[i])) b.push_back(*values[i]);
    }
    std::optional<RankSumResult> r;
    if (!a.empty() && !b.empty()) r = wilcoxon_rank_sum(a, b);
    tests.emplace_back(p.label, r);
  }

  if (c.format == Format::Json) {
    nlohmann::json doc{{"snapshot_version", data.snapshot.version()}, {"year", year}, {"value", value}};
    nlohmann::json b = nlohmann::json::object();
    for (const auto& [label, report] : buckets) b[label] = to_json(report);
    doc["buckets"] = std::move(b);
    nlohmann::json g = nlohmann::json::array();
    for (const auto& p : profiles) g.push_back(to_json(p));
    doc["groups"] = std::move(g);
    nlohmann::json t = nlohmann::json::object();
    for (const auto& [label, r] : tests) t[label] = r ? to_json(*r) : nlohmann::json(nullptr);
    doc["rank_sum_vs_no_chain"] = std::move(t);
    out << doc.dump(2) << "\n";
    return 0;
  }
  if (c.format == Format::Csv) {
    out << buckets_csv(buckets);
    return 0;
  }

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"group"};
  for (std::size_t i = 1; i < bounds.size(); ++i) {
    header.push_back(format_number(bounds[i - 1], 0) + "-" + (std::isinf(bounds[i]) ? "" : format_number(bounds[i], 0)));
  }
  rows.push_back(header);
  for (const auto& [label, report] : buckets) {
    std::vector<std::string> row{label};
    for (const auto& bucket : report.buckets) {
      row.push_back((bucket.mean ? format_number(*bucket.mean, 1) : "NA") + " (" + std::to_string(bucket.count) + ")");
    }
    rows.push_back(std::move(row));
  }
  out << "mean " << value << " by inhabitants, " << year << " (sites in parentheses)\n" << render_table(rows) << "\n";

  rows = {{"group", "sites", "mean index", "mean unemployment"}};
  for (const auto& p : profiles) {
    rows.push_back({p.label, std::to_string(p.sites), p.mean_index ? format_number(*p.mean_index, 1) : "NA",
                    p.mean_unemployment ? format_number(*p.mean_unemployment, 2) : "NA"});
  }
  out << render_table(rows) << "\n";

  rows = {{"chain vs no chain", "W", "z", "p", "mode"}};
  for (const auto& [label, r] : tests) {
    if (!r) {
      rows.push_back({label, "NA", "NA", "NA", "NA"});
      continue;
    }
    rows.push_back({label, format_number(r->statistic, 1), format_number(r->z, 3), format_number(r->p_value, 6),
                    std::string(to_string(r->mode))});
  }
  out << render_table(rows);
  return 0;
}

// --- serve ---

int cmd_serve(const std::string& manifest, const std::string& host, int port, std::ostream& err) {
  Service service(err);
  service.load(manifest);
  httplib::Server server;
  service.bind(server);
  err << "listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) throw Error(Errc::SchemaViolation, "cannot listen on " + host + ":" + std::to_string(port));
  return 0;
}

// --- generate ---

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream f(path);
  if (!f) throw Error(Errc::FileNotFound, "cannot write '" + path.string() + "'");
  f << doc.dump(2) << "\n";
}

int cmd_generate(const std::string& kind, const std::string& dir, std::uint64_t seed, const std::string& chain,
                 const CountryOptions& base, std::ostream& out) {
  if (kind == "published") {
    const auto& counts = published_counts(chain);
    const auto manifest = write_dataset(published_fixture(counts, seed), dir);
    write_json(std::filesystem::path(dir) / "urp.json", to_json(published_profile(counts)));
    out << manifest.string() << "\n";
    return 0;
  }
  auto options = base;
  options.seed = seed;
  const auto manifest = write_dataset(synthetic_country(options), dir);

  Urp urp = threshold_profile({std::string(kNationCode)}, "Municipality", options.year, "inhabitants", Comparator::Ge,
                              options.threshold);
  urp.criteria.front().name = "inhabitants";
  DecisionCriterion power;
  power.name = "purchasing power";
  power.kind = CriterionKind::Preference;
  power.weight = 2.0;
  power.rating = QualitativeRating{
      {{"purchasing_power", MembershipFunction({{2.0e7, 0.0}, {2.0e8, 1.0}}), 1.0}}};
  DecisionCriterion land;
  land.name = "cheap land";
  land.kind = CriterionKind::Preference;
  land.weight = 1.0;
  land.rating = QualitativeRating{{{"land_price", MembershipFunction({{60.0, 1.0}, {380.0, 0.0}}), 1.0}}};
  urp.criteria.push_back(std::move(power));
  urp.criteria.push_back(std::move(land));
  write_json(std::filesystem::path(dir) / "urp.json", to_json(urp));
  out << manifest.string() << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical site selection: ingest location factors, rank candidate sites, evaluate placements."};
  app.name("sitesel");
  app.require_subcommand(1);

  Common common;
  Selection sel;
  std::string urp_path;
  std::optional<std::size_t> top;
  bool strict = false;
  std::vector<std::string> chain_urps, chains, factors, presence;
  bool all_presence = false, index = false;
  std::vector<double> bounds;
  std::string value = "index";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string kind, dir, chain = "lidl";
  std::uint64_t seed = 2016;
  CountryOptions country;

  auto* ingest = app.add_subcommand("ingest", "Validate a dataset and print the ingestion report");
  add_common(ingest, common, false);
  ingest->add_flag("--strict", strict, "Exit 1 when there are warnings");

  auto* rec = app.add_subcommand("recommend", "Rank candidate sites for a requirement profile");
  add_common(rec, common, true);
  rec->add_option("-u,--urp", urp_path, "Requirement profile (JSON)")->required()->check(CLI::ExistingFile);
  rec->add_option("-n,--top", top, "Keep the best N sites");

  auto* eval = app.add_subcommand("evaluate", "Contingency and overlap of store placements against a profile");
  add_common(eval, common, true);
  auto* eval_urp = eval->add_option("-u,--urp", urp_path, "Profile applied to every chain")->check(CLI::ExistingFile);
  eval->add_option("--chain-urp", chain_urps, "Per-chain profile as label=path")->excludes(eval_urp);
  eval->add_option("-c,--chain", chains, "Restrict to these presence sets");

  auto add_selection = [&](CLI::App* cmd) {
    cmd->add_option("-l,--level", sel.level, "Level of the compared sites");
    cmd->add_option("--under", sel.under, "Restrict to the subtree of this site");
  };

  auto* corr = app.add_subcommand("correlate", "Correlation matrix of factors and chain presence");
  add_common(corr, common, true);
  add_selection(corr);
  corr->add_option("--factor", factors, "Factor id (repeatable)");
  corr->add_option("--presence", presence, "Presence set label (repeatable)");
  corr->add_flag("--all-presence", all_presence, "Include every presence set");
  corr->add_flag("--index", index, "Include the purchasing power index");

  auto* prof = app.add_subcommand("profile", "Bucket and chain-group statistics");
  add_common(prof, common, true);
  add_selection(prof);
  prof->add_option("--bounds", bounds, "Inhabitant bucket bounds")->delimiter(',');
  prof->add_option("--value", value, "Factor id, or 'index' for the purchasing power index");

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("-m,--manifest", common.manifest, "Dataset manifest (JSON)")->required()->check(CLI::ExistingFile);
  serve->add_option("--host", host, "Bind address");
  serve->add_option("-p,--port", port, "Port")->check(CLI::Range(1, 65535));

  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  gen->add_option("kind", kind, "country or published")->required()->check(CLI::IsMember({"country", "published"}));
  gen->add_option("-o,--out", dir, "Output directory")->required();
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--chain", chain, "Chain whose published counts to encode (published)");
  gen->add_option("--municipalities", country.municipalities, "Municipalities (country)");
  gen->add_option("--threshold", country.threshold, "Placement threshold of chain alpha (country)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code != 0) err << app.help();
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ingest) return cmd_ingest(common, strict, out);
    if (*rec) return cmd_recommend(common, urp_path, top, out);
    if (*eval) return cmd_evaluate(common, urp_path, chain_urps, chains, out);
    if (*corr) return cmd_correlate(common, sel, factors, presence, all_presence, index, out);
    if (*prof) return cmd_profile(common, sel, bounds, value, out);
    if (*serve) return cmd_serve(common.manifest, host, port, err);
    if (*gen) return cmd_generate(kind, dir, seed, chain, country, out);
  } catch (const InconsistentProfileError& e) {
    err << "error: " << e.what() << "\n";
    for (const auto& c : e.conflicts()) err << "  " << c.first << " vs " << c.second << ": " << c.explanation << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace sitesel::cli
