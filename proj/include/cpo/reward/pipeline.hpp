#pragma once

// Group scoring followed by advantage computation: the record handed to an
// external trainer, produced identically by the CLI and the HTTP service.

#include <json.hpp>

#include "cpo/policy/objective.hpp"
#include "cpo/reward/scoring.hpp"

namespace cpo::reward {

struct ScoreOutput {
  GroupScoreResult scored;
  std::vector<double> advantages;
};

ScoreOutput run_score_pipeline(gateway::Gateway& gateway, const gateway::PromptLibrary& prompts,
                               const ResponseGroup& group, const gateway::ChatEndpointConfig& judge,
                               const ScoringOptions& scoring, const policy::ObjectiveConfig& objective);

// {schema_version, group_id, report, rewards, advantages, diagnostics}
nlohmann::json to_json(const ScoreOutput& out, const std::string& group_id);

// Request body of the scoring endpoint: {context, candidates: [{text,
// length_tokens?}], length_config?}. Candidates are numbered 1..G in order.
// Throws SchemaError on malformed input.
struct ScoreRequest {
  ResponseGroup group;
  std::optional<LengthPenaltyConfig> length_config;
};

ScoreRequest parse_score_request(const nlohmann::json& body);

void to_json(nlohmann::json& j, const LengthPenaltyConfig& c);
void from_json(const nlohmann::json& j, LengthPenaltyConfig& c);

}  // namespace cpo::reward
