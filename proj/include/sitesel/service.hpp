#pragma once

#include "sitesel/analysis.hpp"
#include "sitesel/ingest.hpp"
#include "sitesel/presence.hpp"
#include "sitesel/snapshot.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace httplib {
class Server;
}

namespace sitesel {

/// One complete, immutable serving state. Readers hold a shared_ptr, so a
/// swap never invalidates a request in flight.
struct ServiceState {
  Snapshot snapshot;
  std::vector<PresenceSet> presence;
  std::string source;           // manifest path or "memory"
  std::uint64_t generation = 0;  // bumps on every successful load
  ValidationReport report;

  const PresenceSet* find_presence(std::string_view label) const;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

/// Attribute selector used by /correlate and /ranksum:
///   {"factor": id} | {"presence": label} | {"index": true}, plus optional "label".
Attribute parse_attribute(const nlohmann::json& selector, const ServiceState& state);

/// Sites at `level`, restricted to the subtree of `under` when given.
std::vector<std::string> sites_at(const Hierarchy& hierarchy, std::string_view level,
                                  const std::optional<std::string>& under);

class Service {
 public:
  explicit Service(std::ostream& log);

  /// Ingests the manifest and swaps it in. On failure the current state stays
  /// and the errors are logged and rethrown.
  std::shared_ptr<const ServiceState> load(const std::filesystem::path& manifest);
  std::shared_ptr<const ServiceState> install(Snapshot snapshot, std::vector<PresenceSet> presence,
                                              std::string source = "memory", ValidationReport report = {});
  std::shared_ptr<const ServiceState> state() const;

  using Params = std::vector<std::pair<std::string, std::string>>;

  Response health() const;
  Response sites(const Params& query) const;
  Response site(std::string_view code, const Params& query) const;
  Response factors() const;
  Response factor_values(std::string_view id, const Params& query) const;
  Response recommend(std::string_view body, const Params& query) const;
  Response evaluate(std::string_view body) const;
  Response correlate(std::string_view body) const;
  Response ranksum(std::string_view body) const;

  /// Registers every endpoint on `server`.
  void bind(httplib::Server& server) const;

 private:
  std::ostream& log_;
  mutable std::mutex mutex_;
  std::shared_ptr<const ServiceState> state_;
  std::uint64_t generation_ = 0;
};

}  // namespace sitesel
