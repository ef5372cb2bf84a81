#include "cpo/reward/scoring.hpp"

#include <numeric>

#include "cpo/core/random.hpp"
#include "cpo/core/validate.hpp"

namespace cpo::reward {

std::string render_history(const QueryContext& context) {
  std::string out;
  for (const auto& t : context.history) {
    if (!out.empty()) out += '\n';
    out += (t.role == Role::user ? std::string{"User"} : context.profile.name) + ": " + t.text;
  }
  return out;
}

std::string render_samples(const std::vector<std::string>& texts) {
  std::string out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (i) out += "\n\n";
    out += "[" + std::to_string(i + 1) + "] " + texts[i];
  }
  return out;
}

gateway::Messages build_group_messages(const gateway::PromptLibrary& prompts, const QueryContext& context,
                                       const std::vector<std::string>& texts) {
  const gateway::Bindings b{{"char_name", context.profile.name},
                            {"char_profile", context.profile.profile_text},
                            {"chat_scenario", context.scenario_text},
                            {"messages", render_history(context)},
                            {"samples", render_samples(texts)}};
  return {{"user", gateway::render(prompts.criterion(context.criterion_id), b)}};
}

std::vector<std::size_t> presentation_order(std::size_t group_size, bool shuffle, std::uint64_t seed) {
  std::vector<std::size_t> order(group_size);
  std::iota(order.begin(), order.end(), std::size_t{1});
  if (shuffle) {
    SplitMixRng rng(derive_seed(seed, {fnv1a64("candidate-order")}));
    for (std::size_t i = group_size; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  }
  return order;
}

GroupScoreResult score_group(gateway::Gateway& gateway, const gateway::PromptLibrary& prompts,
                             const ResponseGroup& group, const gateway::ChatEndpointConfig& judge,
                             const ScoringOptions& options) {
  validate(group);
  validate(group.context);
  options.length.validate();
  const std::size_t g = group.size();

  GroupScoreResult out;
  out.presentation_order = presentation_order(g, options.shuffle_candidates, options.shuffle_seed);
  std::vector<std::string> texts;
  texts.reserve(g);
  for (std::size_t idx : out.presentation_order) texts.push_back(group.candidates[idx - 1].text);

  auto parsed = gateway::ask_until_parsed(
      gateway, judge, build_group_messages(prompts, group.context, texts), options.max_attempts,
      std::nullopt, [g](const std::string& text) { return parse_group_scores(text, g); });

  GroupScoreReport shown = std::move(parsed.value);
  GroupScoreReport& report = out.report;
  report.raw_judge_text = std::move(shown.raw_judge_text);
  report.repaired = shown.repaired;
  report.repair_notes = std::move(shown.repair_notes);
  report.attempts = parsed.attempts;
  report.entries.resize(g);
  for (std::size_t p = 0; p < g; ++p) {
    CandidateAssessment e = shown.entries[p];
    e.index = out.presentation_order[p];
    report.entries[e.index - 1] = std::move(e);
  }

  const auto lengths = candidate_lengths(group, out.rewards.approximate);
  const bool approximate = out.rewards.approximate;
  const auto scores = report.scores();
  out.rewards = finalize_rewards(scores, lengths, options.length);
  out.rewards.approximate = approximate;
  return out;
}

double score_samplewise(gateway::Gateway& gateway, const gateway::PromptLibrary& prompts,
                        const QueryContext& context, const Candidate& candidate,
                        const gateway::ChatEndpointConfig& judge, int max_attempts) {
  validate(context);
  auto parsed = gateway::ask_until_parsed(
      gateway, judge, build_group_messages(prompts, context, {candidate.text}), max_attempts, std::nullopt,
      [](const std::string& text) { return parse_group_scores(text, 1); });
  return parsed.value.entries.at(0).score;
}

}  // namespace cpo::reward
