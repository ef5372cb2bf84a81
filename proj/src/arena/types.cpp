#include "cpo/arena/types.hpp"

#include "cpo/core/json.hpp"

namespace cpo::arena {

std::vector<std::string> TournamentPlan::model_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, cfg] : models) ids.push_back(id);
  return ids;
}

void TournamentPlan::validate() const {
  if (models.size() < 2) throw ValidationError("a tournament needs at least 2 models");
  for (const auto& [id, cfg] : models) {
    if (id.empty()) throw ValidationError("model ids must be nonempty");
    cfg.validate();
  }
  user_simulator.validate();
  judge.validate();
  if (corpus.empty()) throw ValidationError("plan has no corpus");
  if (k_matchups < 1) throw ValidationError("k_matchups must be >= 1");
  if (n_turns < 1) throw ValidationError("n_turns must be >= 1");
}

void to_json(nlohmann::json& j, const TournamentPlan& p) {
  nlohmann::json models = nlohmann::json::object();
  for (const auto& [id, cfg] : p.models) models[id] = cfg;
  j = nlohmann::json{{"schema_version", kSchemaVersion},
                     {"models", std::move(models)},
                     {"user_simulator", p.user_simulator},
                     {"judge", p.judge},
                     {"corpus", p.corpus},
                     {"k_matchups", p.k_matchups},
                     {"n_turns", p.n_turns},
                     {"master_seed", p.master_seed}};
}

void from_json(const nlohmann::json& j, TournamentPlan& p) {
  if (j.value("schema_version", kSchemaVersion) != kSchemaVersion) {
    throw SchemaError("unsupported plan schema_version");
  }
  p = TournamentPlan{};
  for (const auto& [id, cfg] : j.at("models").items()) p.models.emplace(id, cfg.get<gateway::ChatEndpointConfig>());
  p.user_simulator = j.at("user_simulator").get<gateway::ChatEndpointConfig>();
  p.judge = j.at("judge").get<gateway::ChatEndpointConfig>();
  p.corpus = j.at("corpus").get<std::string>();
  p.k_matchups = j.value("k_matchups", p.k_matchups);
  p.n_turns = j.value("n_turns", p.n_turns);
  p.master_seed = j.value("master_seed", p.master_seed);
}

void to_json(nlohmann::json& j, const MatchupEntry& e) {
  j = nlohmann::json{{"pair_id", e.pair_id},
                     {"model_a", e.model_a},
                     {"model_b", e.model_b},
                     {"circumstance_id", e.circumstance_id},
                     {"seed", e.seed}};
}

void from_json(const nlohmann::json& j, MatchupEntry& e) {
  e.pair_id = j.at("pair_id").get<std::string>();
  e.model_a = j.at("model_a").get<std::string>();
  e.model_b = j.at("model_b").get<std::string>();
  e.circumstance_id = j.at("circumstance_id").get<std::string>();
  e.seed = j.at("seed").get<std::uint64_t>();
}

nlohmann::json verdict_record(const MatchupResult& r) {
  nlohmann::json j = r.entry;
  const std::string file = "trajectories/" + r.entry.pair_id + ".jsonl";
  j["schema_version"] = kSchemaVersion;
  j["trajectory_a_ref"] = file + "#1";
  j["trajectory_b_ref"] = file + "#2";
  j["verdict"] = r.verdict;
  return j;
}

void to_json(nlohmann::json& j, const MatchupFailure& f) {
  j = f.entry;
  j["stage"] = f.stage;
  j["error"] = f.error;
}

}  // namespace cpo::arena
