#include "cpo/reward/pipeline.hpp"

#include "cpo/core/json.hpp"

namespace cpo::reward {

ScoreOutput run_score_pipeline(gateway::Gateway& gateway, const gateway::PromptLibrary& prompts,
                               const ResponseGroup& group, const gateway::ChatEndpointConfig& judge,
                               const ScoringOptions& scoring, const policy::ObjectiveConfig& objective) {
  objective.validate();
  ScoreOutput out;
  out.scored = score_group(gateway, prompts, group, judge, scoring);
  out.advantages = policy::compute_advantages(out.scored.rewards.final_reward, objective.std_floor);
  return out;
}

nlohmann::json to_json(const ScoreOutput& out, const std::string& group_id) {
  const auto& report = out.scored.report;
  return {{"schema_version", kSchemaVersion},
          {"group_id", group_id},
          {"report", report},
          {"rewards", out.scored.rewards},
          {"advantages", out.advantages},
          {"diagnostics",
           {{"repaired", report.repaired},
            {"attempts", report.attempts},
            {"retries", report.attempts - 1},
            {"repair_notes", report.repair_notes},
            {"approximate_lengths", out.scored.rewards.approximate},
            {"presentation_order", out.scored.presentation_order}}}};
}

void to_json(nlohmann::json& j, const LengthPenaltyConfig& c) {
  j = nlohmann::json{{"l_max", c.l_max}, {"l_cache", c.l_cache}};
}

void from_json(const nlohmann::json& j, LengthPenaltyConfig& c) {
  c = LengthPenaltyConfig{};
  c.l_max = j.value("l_max", c.l_max);
  c.l_cache = j.value("l_cache", c.l_cache);
  c.validate();
}

ScoreRequest parse_score_request(const nlohmann::json& body) {
  if (!body.is_object()) throw SchemaError("request body must be a JSON object");
  ScoreRequest req;
  req.group.id = body.value("id", std::string{});
  if (!body.contains("context")) throw SchemaError("request has no context");
  req.group.context = parse_as<QueryContext>(body["context"], "context");
  if (!body.contains("candidates") || !body["candidates"].is_array()) throw SchemaError("candidates must be an array");
  const auto& cands = body["candidates"];
  std::size_t i = 0;
  for (const auto& c : cands) {
    ++i;
    Candidate cand;
    cand.index = i;
    if (!c.is_object() || !c.contains("text") || !c["text"].is_string()) {
      throw SchemaError("candidate " + std::to_string(i) + " needs a text field");
    }
    cand.text = c["text"].get<std::string>();
    if (c.contains("length_tokens") && !c["length_tokens"].is_null()) {
      const auto& len = c["length_tokens"];
      if (!len.is_number_integer() || len.get<std::int64_t>() < 0) {
        throw SchemaError("candidate " + std::to_string(i) + " length_tokens must be a nonnegative integer");
      }
      cand.length_tokens = c["length_tokens"].get<std::size_t>();
    }
    req.group.candidates.push_back(std::move(cand));
  }
  if (body.contains("length_config") && !body["length_config"].is_null()) {
    req.length_config = parse_as<LengthPenaltyConfig>(body["length_config"], "length_config");
  }
  return req;
}

}  // namespace cpo::reward
