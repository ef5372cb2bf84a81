#pragma once

// Value types shared by every module. All of them are plain aggregates:
// construct, copy and compare freely; nothing here owns a resource.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cpo {

inline constexpr int kSchemaVersion = 1;

enum class Role { user, bot };

// Slot of a model inside a matchup, independent of presentation order.
enum class Side { A, B };

// Winner of a pairwise comparison, or a human label, in true A/B slots.
enum class Outcome { A, B, tie };

std::string_view to_string(Role role);
std::string_view to_string(Side side);
std::string_view to_string(Outcome outcome);
Role role_from_string(std::string_view s);
Side side_from_string(std::string_view s);
Outcome outcome_from_string(std::string_view s);

struct CharacterProfile {
  std::string id;
  std::string name;
  std::string profile_text;
  std::optional<std::string> category;

  bool operator==(const CharacterProfile&) const = default;
};

struct ChatCircumstance {
  std::string id;
  CharacterProfile profile;
  std::string scenario_text;
  std::string opening_line;

  bool operator==(const ChatCircumstance&) const = default;
};

struct Turn {
  Role role = Role::bot;
  std::string text;
  std::size_t index = 0;

  bool operator==(const Turn&) const = default;
};

struct Trajectory {
  std::string circumstance_id;
  std::string model_id;
  std::vector<Turn> turns;
  std::uint64_t seed = 0;
  std::string created_at;

  bool operator==(const Trajectory&) const = default;
};

struct QueryContext {
  CharacterProfile profile;
  // Scene the history takes place in; rendered into the judge prompt.
  std::string scenario_text;
  std::vector<Turn> history;
  std::string criterion_id;

  bool operator==(const QueryContext&) const = default;
};

struct TokenTrace {
  std::vector<double> logp_new;
  std::vector<double> logp_old;
  std::optional<std::vector<double>> logp_ref;

  bool operator==(const TokenTrace&) const = default;
};

struct Candidate {
  std::size_t index = 1;  // 1-based
  std::string text;
  // Completion token count as reported by the generator, when known.
  std::optional<std::size_t> length_tokens;
  std::optional<TokenTrace> token_trace;

  bool operator==(const Candidate&) const = default;
};

struct ResponseGroup {
  std::string id;
  QueryContext context;
  std::vector<Candidate> candidates;

  std::size_t size() const { return candidates.size(); }
  bool operator==(const ResponseGroup&) const = default;
};

struct RewardVector {
  std::vector<double> raw;
  std::vector<double> length_penalty;
  std::vector<double> final_reward;
  // Set when at least one length fell back to a whitespace word count.
  bool approximate = false;

  std::size_t size() const { return raw.size(); }
  bool operator==(const RewardVector&) const = default;
};

struct JudgeVerdict {
  std::string pair_id;
  Side presented_first = Side::A;
  Outcome winner = Outcome::tie;
  // Analyses are stored against true labels, like winner.
  std::string analysis_a;
  std::string analysis_b;
  std::string comparison;
  std::string judge_model_id;
  int attempts = 1;
  bool repaired = false;

  bool operator==(const JudgeVerdict&) const = default;
};

struct OutcomeCounts {
  int wins = 0;
  int ties = 0;
  int losses = 0;

  int total() const { return wins + ties + losses; }
  OutcomeCounts mirrored() const { return {losses, ties, wins}; }
  bool operator==(const OutcomeCounts&) const = default;
};

struct WinRateMatrix {
  std::vector<std::string> model_ids;
  // counts[i][j]: outcomes of model i against model j.
  std::vector<std::vector<OutcomeCounts>> counts;
  // Empty optional marks a pair without completed matchups (and the diagonal).
  std::vector<std::vector<std::optional<double>>> rates;

  std::size_t size() const { return model_ids.size(); }
  std::optional<std::size_t> index_of(std::string_view model_id) const;
  bool operator==(const WinRateMatrix&) const = default;
};

struct AnnotationRecord {
  std::string pair_id;
  std::string annotator_id;
  Outcome label = Outcome::tie;
  std::string submitted_at;

  bool operator==(const AnnotationRecord&) const = default;
};

// Number of whitespace-delimited words; the fallback length unit when a
// generator does not report token usage.
std::size_t word_count(std::string_view text);

}  // namespace cpo
