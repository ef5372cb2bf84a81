#include "cpo/reward/rewards.hpp"

#include <algorithm>
#include <string>

#include "cpo/core/error.hpp"

namespace cpo::reward {

void LengthPenaltyConfig::validate() const {
  if (l_cache == 0 || l_max == 0 || l_cache > l_max)
    throw ValidationError("length penalty needs 0 < l_cache <= l_max (got l_max=" +
                          std::to_string(l_max) + ", l_cache=" + std::to_string(l_cache) + ")");
}

double length_penalty(std::size_t length_tokens, const LengthPenaltyConfig& cfg) {
  const std::size_t free_len = cfg.l_max - cfg.l_cache;
  if (length_tokens <= free_len) return 0.0;
  if (length_tokens > cfg.l_max) return -1.0;
  return (static_cast<double>(free_len) - static_cast<double>(length_tokens)) /
         static_cast<double>(cfg.l_max);
}

RewardVector finalize_rewards(std::span<const double> raw_scores,
                              std::span<const std::size_t> lengths,
                              const LengthPenaltyConfig& cfg) {
  cfg.validate();
  if (raw_scores.size() != lengths.size())
    throw ValidationError("finalize_rewards: " + std::to_string(raw_scores.size()) +
                          " scores but " + std::to_string(lengths.size()) + " lengths");
  RewardVector out;
  out.raw.assign(raw_scores.begin(), raw_scores.end());
  out.length_penalty.reserve(lengths.size());
  out.final_reward.reserve(lengths.size());
  for (std::size_t i = 0; i < raw_scores.size(); ++i) {
    const double r = raw_scores[i];
    if (!(r >= 0.0 && r <= 1.0))
      throw ValidationError("finalize_rewards: raw score " + std::to_string(r) +
                            " of candidate " + std::to_string(i + 1) + " outside [0, 1]");
    const double pen = length_penalty(lengths[i], cfg);
    out.length_penalty.push_back(pen);
    out.final_reward.push_back(std::clamp(r + pen, 0.0, 1.0));
  }
  return out;
}

std::vector<std::size_t> candidate_lengths(const ResponseGroup& group, bool& approximate) {
  approximate = false;
  std::vector<std::size_t> lengths;
  lengths.reserve(group.candidates.size());
  for (const auto& c : group.candidates) {
    if (c.length_tokens) {
      lengths.push_back(*c.length_tokens);
    } else {
      lengths.push_back(word_count(c.text));
      approximate = true;
    }
  }
  return lengths;
}

std::size_t select_rft_best(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("cannot select from an empty group");
  // max_element returns the first maximal element, i.e. the lowest index.
  return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin()) + 1;
}

std::pair<std::size_t, std::size_t> select_dpo_pair(std::span<const double> scores) {
  const std::size_t best = select_rft_best(scores);
  const std::size_t worst =
      static_cast<std::size_t>(std::min_element(scores.begin(), scores.end()) - scores.begin()) + 1;
  if (best == worst) throw ValidationError("degenerate pair: every candidate scored equally");
  return {best, worst};
}

std::size_t select_rft_best(const RewardVector& rewards) { return select_rft_best(rewards.final_reward); }

std::pair<std::size_t, std::size_t> select_dpo_pair(const RewardVector& rewards) {
  return select_dpo_pair(rewards.final_reward);
}

std::size_t select_rft_best(const GroupScoreReport& report) { return select_rft_best(report.scores()); }

std::pair<std::size_t, std::size_t> select_dpo_pair(const GroupScoreReport& report) {
  return select_dpo_pair(report.scores());
}

}  // namespace cpo::reward
