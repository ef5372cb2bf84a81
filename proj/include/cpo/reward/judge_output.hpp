#pragma once

// Parsing and repair of judge replies.
//
// Repair policy, shared by group scoring and pairwise verdicts:
//   * a reply that is exactly one JSON object is taken as-is;
//   * otherwise the first balanced JSON object in the text is used, after
//     dropping trailing commas if needed;
//   * scores outside [0, 1] are clipped, numeric strings are coerced;
//   * missing or score-inconsistent ranks are recomputed from scores.
// Anything touched by these steps sets `repaired`. Missing scores, wrong
// candidate indices or text without a usable object raise JudgeOutputError;
// nothing is ever defaulted to zero.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cpo::reward {

struct CandidateAssessment {
  std::size_t index = 1;
  std::string analysis;
  int rank = 1;
  double score = 0.0;

  bool operator==(const CandidateAssessment&) const = default;
};

struct GroupScoreReport {
  std::vector<CandidateAssessment> entries;  // entries[i].index == i + 1
  std::string raw_judge_text;
  bool repaired = false;
  int attempts = 1;
  std::vector<std::string> repair_notes;

  std::vector<double> scores() const;
  bool operator==(const GroupScoreReport&) const = default;
};

void to_json(nlohmann::json& j, const GroupScoreReport& r);
void from_json(const nlohmann::json& j, GroupScoreReport& r);

// Byte range [begin, end) of the first balanced {...} starting at or after
// `from`, honoring JSON string quoting. nullopt when none closes.
std::optional<std::pair<std::size_t, std::size_t>> find_balanced_object(std::string_view text,
                                                                        std::size_t from = 0);

struct LenientObject {
  nlohmann::json value;
  bool repaired = false;
  std::vector<std::string> notes;
};

// Throws JudgeOutputError (attempts = 1) when no JSON object can be recovered.
LenientObject parse_lenient_object(std::string_view reply);

// Parses a group-scoring reply for a group of `group_size` candidates.
GroupScoreReport parse_group_scores(std::string_view reply, std::size_t group_size);

// Checks ranks form a permutation of 1..G agreeing with score order.
bool ranks_consistent(const std::vector<CandidateAssessment>& entries);

enum class PresentedWinner { first, second, tie };

struct PairwiseReply {
  std::string analysis_first;
  std::string analysis_second;
  std::string comparison;
  PresentedWinner winner = PresentedWinner::tie;
  bool repaired = false;
};

// Parses an arena-judge reply ("analysis A", "analysis B", "comparison AB",
// "rank"), where A/B refer to presentation order.
PairwiseReply parse_pairwise_reply(std::string_view reply);

}  // namespace cpo::reward
