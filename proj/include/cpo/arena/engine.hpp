#pragma once

#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <vector>

#include <json.hpp>

#include "cpo/arena/types.hpp"
#include "cpo/gateway/chat.hpp"
#include "cpo/gateway/template.hpp"

namespace cpo::arena {

using Clock = std::function<std::string()>;

// Every unordered model pair (sorted ids, i < j) gets k_matchups entries.
// Circumstances are drawn per pair without replacement until the corpus runs
// out, then with replacement. Everything derives from master_seed.
std::vector<MatchupEntry> plan_matchups(const TournamentPlan& plan, const std::vector<ChatCircumstance>& corpus);

// Turn 0 is the opening line; then n_turns rounds of simulator reply and bot
// reply. An empty reply is re-asked once before the dialogue fails.
Trajectory simulate_dialogue(gateway::Gateway& gateway, const gateway::PromptLibrary& prompts,
                             const gateway::ChatEndpointConfig& bot, const gateway::ChatEndpointConfig& user_sim,
                             const ChatCircumstance& circumstance, std::size_t n_turns, std::uint64_t seed,
                             const std::string& model_id, const Clock& clock = {});

// Role-specific message lists for the next reply; exposed for tests.
gateway::Messages bot_messages(const gateway::PromptLibrary& prompts, const ChatCircumstance& c,
                               const std::vector<Turn>& turns);
gateway::Messages user_sim_messages(const gateway::PromptLibrary& prompts, const ChatCircumstance& c,
                                    const std::vector<Turn>& turns);

std::uint64_t side_seed(std::uint64_t matchup_seed, Side side);

// Writes per-matchup files into a run directory; safe for concurrent use
// because each matchup owns its files.
class RunWriter {
 public:
  explicit RunWriter(std::filesystem::path dir);
  const std::filesystem::path& dir() const { return dir_; }
  void write_matchup(const MatchupResult& r) const;

 private:
  std::filesystem::path dir_;
};

class MatchupError : public Error {
 public:
  MatchupError(MatchupFailure failure)
      : Error(failure.stage + " failed for " + failure.entry.pair_id + ": " + failure.error),
        failure_(std::move(failure)) {}
  const MatchupFailure& failure() const { return failure_; }

 private:
  MatchupFailure failure_;
};

struct MatchupContext {
  gateway::Gateway& gateway;
  const gateway::PromptLibrary& prompts;
  const TournamentPlan& plan;
  const ChatCircumstance& circumstance;
  const RunWriter* writer = nullptr;
  Clock clock;
};

// Simulates both sides, judges them and persists the result. Throws
// MatchupError naming the failed stage.
MatchupResult run_matchup(const MatchupEntry& entry, const MatchupContext& ctx);

struct TournamentOptions {
  std::size_t parallelism = 4;
  std::optional<std::filesystem::path> out_dir;  // run directory; nothing written when empty
  Clock clock;
};

struct TournamentOutcome {
  std::vector<MatchupResult> results;  // completed, in plan order
  std::vector<MatchupFailure> failures;
  WinRateMatrix matrix;
  nlohmann::json manifest;
  bool every_pair_has_data = false;
};

TournamentOutcome run_tournament(gateway::Gateway& gateway, const gateway::PromptLibrary& prompts,
                                 const TournamentPlan& plan, const std::vector<ChatCircumstance>& corpus,
                                 const TournamentOptions& options = {});

// matrix.json body: counts, rates (null when missing) and the tie convention.
nlohmann::json matrix_document(const WinRateMatrix& matrix);

// Reloads completed matchups from a run directory (verdicts.jsonl plus the
// referenced trajectories).
std::vector<MatchupResult> load_run_results(const std::filesystem::path& run_dir);

}  // namespace cpo::arena
