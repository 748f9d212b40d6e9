#include "sitesel/service.hpp"

#include "sitesel/engine.hpp"
#include "sitesel/error.hpp"
#include "sitesel/report.hpp"
#include "sitesel/stats.hpp"
#include "sitesel/urp.hpp"

#include <httplib.h>

#include <charconv>
#include <ostream>

namespace sitesel {
namespace {

int status_for(Errc code) {
  switch (code) {
    case Errc::UnknownSite:
    case Errc::UnknownFocus:
    case Errc::UnknownFactor:
      return 404;
    case Errc::InconsistentProfile:
    case Errc::InsufficientData:
    case Errc::ZeroVariance:
    case Errc::EmptySample:
    case Errc::EmptyStoreSet:
    case Errc::MissingFactor:
    case Errc::ZeroNationalAverage:
    case Errc::UnresolvableAtRoot:
    case Errc::LengthMismatch:
      return 422;
    default:
      return 400;
  }
}

nlohmann::json version_of(const ServiceState* state) {
  if (!state) return nullptr;
  return state->snapshot.version();
}

Response error_response(int status, std::string code, std::string message, const ServiceState* state) {
  return {status, {{"error", {{"code", std::move(code)}, {"message", std::move(message)}}},
                   {"snapshot_version", version_of(state)}}};
}

Response ok(nlohmann::json body, const ServiceState& state) {
  body["snapshot_version"] = state.snapshot.version();
  return {200, std::move(body)};
}

std::optional<std::string> param(const Service::Params& query, std::string_view key) {
  for (const auto& [k, v] : query) {
    if (k == key) return v;
  }
  return std::nullopt;
}

template <typename Int>
Int parse_integer(const std::string& text, std::string_view what) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(Errc::SchemaViolation, std::string(what) + " must be an integer, got '" + text + "'");
  }
  return v;
}

nlohmann::json parse_body(std::string_view body) {
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SchemaViolation, std::string("request body is not valid JSON: ") + e.what());
  }
}

nlohmann::json site_json(const Hierarchy& hier, SiteId id) {
  const auto& s = hier.site(id);
  return {{"code", s.code},
          {"name", s.name},
          {"level", hier.levels().name(s.level)},
          {"parent", s.parent ? nlohmann::json(hier.site(*s.parent).code) : nlohmann::json(nullptr)}};
}

// A set of sites given either by chain presence or by an explicit list.
SiteSet parse_group(const nlohmann::json& selector, const ServiceState& state) {
  if (!selector.is_object()) throw Error(Errc::SchemaViolation, "group selector must be an object");
  SiteSet out;
  if (selector.contains("sites")) {
    for (const auto& code : selector.at("sites")) {
      const auto c = code.get<std::string>();
      state.snapshot.hierarchy().require(c);
      out.insert(c);
    }
    return out;
  }
  const bool with = selector.contains("presence");
  const bool without = selector.contains("absent");
  if (with == without) {
    throw Error(Errc::SchemaViolation, "group selector needs exactly one of 'sites', 'presence', 'absent'");
  }
  const auto label = selector.at(with ? "presence" : "absent").get<std::string>();
  const auto* set = state.find_presence(label);
  if (!set) throw Error(Errc::UnknownFactor, "no presence set '" + label + "'");
  return set->sites();
}

// /evaluate takes inline presence sets or labels of loaded ones; none means all loaded.
std::vector<PresenceSet> parse_presence(const nlohmann::json& doc, const ServiceState& state) {
  if (!doc.contains("presence")) return state.presence;
  std::vector<PresenceSet> out;
  for (const auto& item : doc.at("presence")) {
    if (item.is_string()) {
      const auto label = item.get<std::string>();
      const auto* set = state.find_presence(label);
      if (!set) throw Error(Errc::UnknownFactor, "no presence set '" + label + "'");
      out.push_back(*set);
      continue;
    }
    PresenceSet set;
    set.label = item.at("label").get<std::string>();
    const auto& sites = item.at("sites");
    if (sites.is_array()) {
      for (const auto& code : sites) set.counts[code.get<std::string>()] += 1;
    } else {
      for (const auto& [code, n] : sites.items()) {
        if (n.get<int>() > 0) set.counts[code] += n.get<int>();
      }
    }
    out.push_back(std::move(set));
  }
  return out;
}

}  // namespace

const PresenceSet* ServiceState::find_presence(std::string_view label) const {
  for (const auto& p : presence) {
    if (p.label == label) return &p;
  }
  return nullptr;
}

Attribute parse_attribute(const nlohmann::json& selector, const ServiceState& state) {
  if (!selector.is_object()) throw Error(Errc::SchemaViolation, "attribute selector must be an object");
  if (selector.contains("factor")) {
    const auto id = selector.at("factor").get<std::string>();
    state.snapshot.require_factor(id);
    return {selector.value("label", id), FactorSource{id}};
  }
  if (selector.contains("presence")) {
    const auto label = selector.at("presence").get<std::string>();
    const auto* set = state.find_presence(label);
    if (!set) throw Error(Errc::UnknownFactor, "no presence set '" + label + "'");
    return {selector.value("label", label), PresenceSource{*set}};
  }
  if (selector.value("index", false)) {
    return {selector.value("label", std::string("purchasing_power_index")), PowerIndexSource{}};
  }
  throw Error(Errc::SchemaViolation, "attribute selector needs 'factor', 'presence' or 'index'");
}

std::vector<std::string> sites_at(const Hierarchy& hier, std::string_view level,
                                  const std::optional<std::string>& under) {
  const auto l = hier.levels().require(level);
  std::vector<std::string> out;
  const auto ids = under ? hier.subtree_at_level(hier.require(*under), l) : hier.at_level(l);
  for (auto id : ids) out.push_back(hier.site(id).code);
  return out;
}

Service::Service(std::ostream& log) : log_(log) {}

std::shared_ptr<const ServiceState> Service::load(const std::filesystem::path& manifest) {
  IngestResult result;
  try {
    result = build_snapshot(load_manifest(manifest));
  } catch (const Error& e) {
    log_ << "load " << manifest.string() << " failed: " << e.what() << "\n";
    throw;
  }
  if (!result.snapshot) {
    for (const auto& e : result.report.errors) log_ << "load " << manifest.string() << ": " << e << "\n";
    throw Error(Errc::SchemaViolation, "manifest '" + manifest.string() + "' has " +
                                           std::to_string(result.report.errors.size()) + " fatal error(s)");
  }
  return install(std::move(*result.snapshot), std::move(result.presence), manifest.string(),
                 std::move(result.report));
}

std::shared_ptr<const ServiceState> Service::install(Snapshot snapshot, std::vector<PresenceSet> presence,
                                                     std::string source, ValidationReport report) {
  auto next = std::make_shared<ServiceState>(
      ServiceState{std::move(snapshot), std::move(presence), std::move(source), 0, std::move(report)});
  std::lock_guard lock(mutex_);
  next->generation = ++generation_;
  state_ = next;
  log_ << "serving " << next->source << " version " << next->snapshot.version() << "\n";
  return next;
}

std::shared_ptr<const ServiceState> Service::state() const {
  std::lock_guard lock(mutex_);
  return state_;
}

Response Service::health() const {
  const auto s = state();
  if (!s) return {200, {{"status", "empty"}, {"snapshot_version", nullptr}}};
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& p : s->presence) labels.push_back(p.label);
  return ok({{"status", "ok"},
             {"generation", s->generation},
             {"source", s->source},
             {"sites", s->snapshot.hierarchy().size()},
             {"factors", s->snapshot.factors().size()},
             {"values", s->snapshot.value_count()},
             {"years", s->snapshot.observed_years()},
             {"presence", std::move(labels)}},
            *s);
}

// Every handler funnels through here: snapshot pinning and error mapping.
template <typename F>
static Response guarded(const std::shared_ptr<const ServiceState>& s, F&& body) {
  if (!s) return error_response(503, "NoSnapshot", "no snapshot loaded", nullptr);
  try {
    return body(*s);
  } catch (const InconsistentProfileError& e) {
    auto r = error_response(422, "InconsistentProfile", e.what(), s.get());
    nlohmann::json conflicts = nlohmann::json::array();
    for (const auto& c : e.conflicts()) conflicts.push_back(to_json(c));
    r.body["conflicts"] = std::move(conflicts);
    return r;
  } catch (const Error& e) {
    return error_response(status_for(e.code()), std::string(to_string(e.code())), e.what(), s.get());
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, "SchemaViolation", e.what(), s.get());
  }
}

Response Service::sites(const Params& query) const {
  return guarded(state(), [&](const ServiceState& s) {
    const auto& hier = s.snapshot.hierarchy();
    const auto level = param(query, "level");
    const auto under = param(query, "under");
    std::optional<SiteId> root;
    if (under) root = hier.require(*under);
    std::optional<LevelIndex> l;
    if (level) l = hier.levels().require(*level);

    nlohmann::json out = nlohmann::json::array();
    for (SiteId id = 0; id < hier.size(); ++id) {
      if (l && hier.site(id).level != *l) continue;
      if (root && !hier.is_within(id, *root)) continue;
      out.push_back(site_json(hier, id));
    }
    return ok({{"sites", std::move(out)}}, s);
  });
}

Response Service::site(std::string_view code, const Params& query) const {
  return guarded(state(), [&](const ServiceState& s) {
    const auto& hier = s.snapshot.hierarchy();
    const auto id = hier.require(code);
    auto body = site_json(hier, id);
    nlohmann::json children = nlohmann::json::array();
    for (auto c : hier.children(id)) children.push_back(hier.site(c).code);
    body["children"] = std::move(children);

    std::vector<int> years = s.snapshot.observed_years();
    if (const auto y = param(query, "year")) years = {parse_integer<int>(*y, "year")};
    nlohmann::json values = nlohmann::json::object();
    for (FactorId f = 0; f < s.snapshot.factors().size(); ++f) {
      nlohmann::json per_year = nlohmann::json::object();
      for (int year : years) {
        const auto v = resolve_factor(s.snapshot, id, f, year);
        per_year[std::to_string(year)] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
      }
      values[s.snapshot.factor(f).id] = std::move(per_year);
    }
    body["values"] = std::move(values);
    return ok(std::move(body), s);
  });
}

Response Service::factors() const {
  return guarded(state(), [&](const ServiceState& s) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& f : s.snapshot.factors()) {
      out.push_back({{"id", f.id},
                     {"name", f.name},
                     {"unit", f.unit},
                     {"native_level", s.snapshot.hierarchy().levels().name(f.native_level)},
                     {"aggregation", std::string(to_string(f.aggregation))}});
    }
    return ok({{"factors", std::move(out)}}, s);
  });
}

Response Service::factor_values(std::string_view id, const Params& query) const {
  return guarded(state(), [&](const ServiceState& s) {
    const auto f = s.snapshot.require_factor(id);
    const auto& hier = s.snapshot.hierarchy();
    const auto year_text = param(query, "year");
    if (!year_text) throw Error(Errc::SchemaViolation, "query parameter 'year' is required");
    const int year = parse_integer<int>(*year_text, "year");
    const auto level = param(query, "level").value_or(hier.levels().name(s.snapshot.factor(f).native_level));

    nlohmann::json out = nlohmann::json::array();
    for (auto site : hier.at_level(hier.levels().require(level))) {
      const auto v = resolve_factor(s.snapshot, site, f, year);
      out.push_back({{"site", hier.site(site).code}, {"value", v ? nlohmann::json(*v) : nlohmann::json(nullptr)}});
    }
    return ok({{"factor", std::string(id)}, {"year", year}, {"level", level}, {"values", std::move(out)}}, s);
  });
}

Response Service::recommend(std::string_view body, const Params& query) const {
  return guarded(state(), [&](const ServiceState& s) {
    std::optional<std::size_t> top_k;
    if (const auto k = param(query, "top_k")) top_k = parse_integer<std::size_t>(*k, "top_k");
    const auto urp = parse_urp(parse_body(body));
    return ok({{"results", to_json(sitesel::recommend(s.snapshot, urp, top_k))}}, s);
  });
}

Response Service::evaluate(std::string_view body) const {
  return guarded(state(), [&](const ServiceState& s) {
    const auto doc = parse_body(body);
    if (!doc.is_object() || !doc.contains("urp")) throw Error(Errc::SchemaViolation, "body needs an 'urp' member");
    const auto urp = parse_urp(doc.at("urp"));
    if (auto conflicts = check_consistency(urp); !conflicts.empty()) {
      throw InconsistentProfileError(std::move(conflicts));
    }
    const auto presence = parse_presence(doc, s);
    const std::vector<Urp> profiles(presence.size(), urp);
    const auto report = evaluate_chains(s.snapshot, presence, profiles);

    auto out = to_json(report);
    const auto sites = evaluate_candidates(s.snapshot, urp);
    out["universe"] = sites.size();
    out["fulfilled"] = std::count_if(sites.begin(), sites.end(), [](const Recommendation& r) { return !r.eliminated; });
    out["sites"] = to_json(sites);
    return ok(std::move(out), s);
  });
}

Response Service::correlate(std::string_view body) const {
  return guarded(state(), [&](const ServiceState& s) {
    const auto doc = parse_body(body);
    const int year = doc.at("year").get<int>();
    std::vector<Attribute> attributes;
    for (const auto& a : doc.at("attributes")) attributes.push_back(parse_attribute(a, s));

    std::vector<std::string> sites;
    if (doc.contains("sites")) {
      sites = doc.at("sites").get<std::vector<std::string>>();
    } else {
      std::optional<std::string> under;
      if (doc.contains("under")) under = doc.at("under").get<std::string>();
      sites = sites_at(s.snapshot.hierarchy(), doc.at("level").get<std::string>(), under);
    }
    auto out = to_json(correlation_matrix(s.snapshot, attributes, sites, year));
    out["sites"] = sites.size();
    out["year"] = year;
    return ok(std::move(out), s);
  });
}

Response Service::ranksum(std::string_view body) const {
  return guarded(state(), [&](const ServiceState& s) {
    const auto doc = parse_body(body);
    const int year = doc.at("year").get<int>();
    const auto attribute = parse_attribute(doc.at("value"), s);
    std::optional<std::string> under;
    if (doc.contains("under")) under = doc.at("under").get<std::string>();
    const auto universe = sites_at(s.snapshot.hierarchy(), doc.at("level").get<std::string>(), under);

    const auto groups = doc.at("groups");
    if (!groups.is_array() || groups.size() != 2) throw Error(Errc::SchemaViolation, "'groups' needs two selectors");
    const auto a_sites = parse_group(groups[0], s);
    const auto b_sites = parse_group(groups[1], s);

    const auto values = collect_values(s.snapshot, attribute.source, universe, year);
    std::vector<double> a, b;
    for (std::size_t i = 0; i < universe.size(); ++i) {
      if (!values[i]) continue;
      const bool in_a = a_sites.contains(universe[i]);
      const bool in_b = b_sites.contains(universe[i]);
      // "absent" selectors are complements within the universe
      if (groups[0].contains("absent") ? !in_a : in_a) a.push_back(*values[i]);
      if (groups[1].contains("absent") ? !in_b : in_b) b.push_back(*values[i]);
    }
    auto out = to_json(wilcoxon_rank_sum(a, b));
    out["attribute"] = attribute.label;
    out["year"] = year;
    return ok(std::move(out), s);
  });
}

void Service::bind(httplib::Server& server) const {
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto params = [](const httplib::Request& req) {
    Params out;
    for (const auto& [k, v] : req.params) out.emplace_back(k, v);
    return out;
  };

  server.Get("/health", [=, this](const httplib::Request&, httplib::Response& res) { reply(res, health()); });
  server.Get("/sites", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, sites(params(req)));
  });
  server.Get(R"(/sites/([^/]+))", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, site(req.matches[1].str(), params(req)));
  });
  server.Get("/factors", [=, this](const httplib::Request&, httplib::Response& res) { reply(res, factors()); });
  server.Get(R"(/factors/([^/]+)/values)", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, factor_values(req.matches[1].str(), params(req)));
  });
  server.Post("/recommend", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, recommend(req.body, params(req)));
  });
  server.Post("/evaluate", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, evaluate(req.body));
  });
  server.Post("/correlate", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, correlate(req.body));
  });
  server.Post("/ranksum", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, ranksum(req.body));
  });
}

}  // namespace sitesel
