#pragma once

#include "sitesel/analysis.hpp"
#include "sitesel/engine.hpp"
#include "sitesel/ingest.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace sitesel {

// JSON forms shared by the CLI and the HTTP service. Non-finite numbers map to null.

nlohmann::json to_json(const Recommendation& rec);
nlohmann::json to_json(const std::vector<Recommendation>& recs);
nlohmann::json to_json(const Conflict& conflict);
nlohmann::json to_json(const ContingencyTable& table);
nlohmann::json to_json(const CorrelationMatrix& matrix);
nlohmann::json to_json(const RankSumResult& result);
nlohmann::json to_json(const BucketReport& report);
nlohmann::json to_json(const GroupProfile& group);
nlohmann::json to_json(const ValidationReport& report);

/// Per-chain overlap evaluation in the shape of the overlap / contingency /
/// new-site tables of the supermarket study.
struct ChainEvaluation {
  std::string label;
  ContingencyTable table;
  std::optional<double> overlap;    // percent; absent when the chain has no store
  std::size_t recommended = 0;      // candidates passing every must-have, minus this chain's own sites
  std::size_t without_markets = 0;  // recommended sites with no store of any chain
};

struct EvaluationReport {
  std::vector<ChainEvaluation> chains;
  std::size_t universe = 0;
  std::size_t stores = 0;       // sites with a store, summed over chains
  std::size_t overlapping = 0;  // store sites fulfilling the criteria, summed over chains
  std::optional<double> overall_overlap;
};

/// `profiles[i]` is the profile applied to `chains[i]`. All profiles must share
/// focus and target level so the universe is common.
EvaluationReport evaluate_chains(const Snapshot& snapshot, std::span<const PresenceSet> chains,
                                 std::span<const Urp> profiles);
nlohmann::json to_json(const EvaluationReport& report);

std::string matrix_csv(const CorrelationMatrix& matrix);
std::string buckets_csv(const std::vector<std::pair<std::string, BucketReport>>& rows);

/// Fixed-width text table; first row is the header.
std::string render_table(const std::vector<std::vector<std::string>>& rows);

std::string format_number(double v, int precision = 4);

}  // namespace sitesel
