#pragma once

#include <cstddef>
#include <span>
#include <utility>

#include "cpo/core/types.hpp"
#include "cpo/reward/judge_output.hpp"

namespace cpo::reward {

struct LengthPenaltyConfig {
  std::size_t l_max = 128;
  std::size_t l_cache = 60;

  void validate() const;  // 0 < l_cache <= l_max
};

// Soft overlength penalty: 0 up to l_max - l_cache, a linear ramp down to
// -l_cache/l_max at l_max, and -1 beyond l_max.
double length_penalty(std::size_t length_tokens, const LengthPenaltyConfig& cfg);

// final_i = clip(raw_i + length_penalty(length_i), 0, 1). Raw scores must
// already lie in [0, 1]; anything else means an upstream parsing bug.
RewardVector finalize_rewards(std::span<const double> raw_scores,
                              std::span<const std::size_t> lengths,
                              const LengthPenaltyConfig& cfg);

// Lengths of a group's candidates, falling back to word counts where the
// generator did not report tokens. `approximate` is set on fallback.
std::vector<std::size_t> candidate_lengths(const ResponseGroup& group, bool& approximate);

// Highest score; ties go to the lowest candidate index (1-based).
std::size_t select_rft_best(std::span<const double> scores);
std::size_t select_rft_best(const RewardVector& rewards);  // by final reward
std::size_t select_rft_best(const GroupScoreReport& report);  // by judge score

// (best, worst), lowest index on ties. Throws ValidationError("degenerate
// pair") when best == worst.
std::pair<std::size_t, std::size_t> select_dpo_pair(std::span<const double> scores);
std::pair<std::size_t, std::size_t> select_dpo_pair(const RewardVector& rewards);
std::pair<std::size_t, std::size_t> select_dpo_pair(const GroupScoreReport& report);

}  // namespace cpo::reward
