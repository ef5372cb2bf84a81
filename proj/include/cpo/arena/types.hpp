#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpo/core/types.hpp"
#include "cpo/gateway/chat.hpp"

namespace cpo::arena {

struct TournamentPlan {
  std::map<std::string, gateway::ChatEndpointConfig> models;  // model_id -> endpoint
  gateway::ChatEndpointConfig user_simulator;
  gateway::ChatEndpointConfig judge;
  std::string corpus;  // JSONL of ChatCircumstance; relative paths resolve against the plan file
  std::size_t k_matchups = 50;
  std::size_t n_turns = 15;
  std::uint64_t master_seed = 0;

  std::vector<std::string> model_ids() const;  // sorted
  void validate() const;
  bool operator==(const TournamentPlan&) const = default;
};

void to_json(nlohmann::json& j, const TournamentPlan& p);
void from_json(const nlohmann::json& j, TournamentPlan& p);

// One planned comparison. pair_id is opaque so it can be shown to human
// annotators without revealing which models are involved.
struct MatchupEntry {
  std::string pair_id;
  std::string model_a;
  std::string model_b;
  std::string circumstance_id;
  std::uint64_t seed = 0;

  bool operator==(const MatchupEntry&) const = default;
};

void to_json(nlohmann::json& j, const MatchupEntry& e);
void from_json(const nlohmann::json& j, MatchupEntry& e);

struct MatchupResult {
  MatchupEntry entry;
  Trajectory trajectory_a;
  Trajectory trajectory_b;
  JudgeVerdict verdict;

  bool operator==(const MatchupResult&) const = default;
};

// verdicts.jsonl record: entry fields, trajectory references and the verdict.
// Trajectories themselves live in trajectories/<pair_id>.jsonl (A then B).
nlohmann::json verdict_record(const MatchupResult& r);

struct MatchupFailure {
  MatchupEntry entry;
  std::string stage;  // simulate_a | simulate_b | judge
  std::string error;
};

void to_json(nlohmann::json& j, const MatchupFailure& f);

}  // namespace cpo::arena
