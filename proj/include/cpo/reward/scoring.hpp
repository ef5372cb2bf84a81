#pragma once

// Judge-backed reward assignment: one comparative prompt per group, or one
// prompt per candidate for the sample-wise baseline.

#include <cstdint>
#include <string>
#include <vector>

#include "cpo/core/types.hpp"
#include "cpo/gateway/chat.hpp"
#include "cpo/gateway/judge.hpp"
#include "cpo/gateway/template.hpp"
#include "cpo/reward/judge_output.hpp"
#include "cpo/reward/rewards.hpp"

namespace cpo::reward {

struct ScoringOptions {
  LengthPenaltyConfig length;
  int max_attempts = gateway::kDefaultJudgeAttempts;
  // Present candidates in a seeded random order instead of sampling order.
  bool shuffle_candidates = false;
  std::uint64_t shuffle_seed = 0;
};

struct GroupScoreResult {
  GroupScoreReport report;  // indexed by original candidate index
  RewardVector rewards;
  // presentation_order[p] = original 1-based index shown at slot p + 1.
  std::vector<std::size_t> presentation_order;
};

// "User: ..." / "<name>: ..." lines.
std::string render_history(const QueryContext& context);

// "[i] text" blocks, i counted from 1 in presentation order.
std::string render_samples(const std::vector<std::string>& texts);

gateway::Messages build_group_messages(const gateway::PromptLibrary& prompts, const QueryContext& context,
                                       const std::vector<std::string>& texts);

std::vector<std::size_t> presentation_order(std::size_t group_size, bool shuffle, std::uint64_t seed);

// Throws ValidationError for an invalid group, JudgeOutputError when the
// judge reply stays unusable, TransportError on endpoint failure.
GroupScoreResult score_group(gateway::Gateway& gateway, const gateway::PromptLibrary& prompts,
                             const ResponseGroup& group, const gateway::ChatEndpointConfig& judge,
                             const ScoringOptions& options = {});

// One candidate rendered alone with the same criterion; returns its score.
double score_samplewise(gateway::Gateway& gateway, const gateway::PromptLibrary& prompts,
                        const QueryContext& context, const Candidate& candidate,
                        const gateway::ChatEndpointConfig& judge,
                        int max_attempts = gateway::kDefaultJudgeAttempts);

}  // namespace cpo::reward
