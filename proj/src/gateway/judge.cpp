#include "cpo/gateway/judge.hpp"

#include "cpo/core/random.hpp"
#include "cpo/reward/judge_output.hpp"

namespace cpo::gateway {

std::string render_dialogue(const Trajectory& t, const std::string& char_name) {
  std::string out;
  std::size_t n = 1;
  for (const auto& turn : t.turns) {
    if (!out.empty()) out += '\n';
    out += std::to_string(n++) + ". " + (turn.role == Role::bot ? char_name : std::string{"User"}) + ": " +
           turn.text;
  }
  return out;
}

Side presentation_first(std::uint64_t rng_seed) {
  SplitMixRng rng(derive_seed(rng_seed, {fnv1a64("presentation")}));
  return (rng.next() & 1U) ? Side::B : Side::A;
}

Messages build_pairwise_messages(const PromptLibrary& prompts, const ChatCircumstance& c,
                                 const Trajectory& shown_first, const Trajectory& shown_second) {
  const Bindings b{{"char_name", c.profile.name},
                   {"char_profile", c.profile.profile_text},
                   {"scene_desc", c.scenario_text},
                   {"dialogue_a", render_dialogue(shown_first, c.profile.name)},
                   {"dialogue_b", render_dialogue(shown_second, c.profile.name)}};
  return {{"user", render(prompts.get(prompt_ids::kArenaJudge), b)}};
}

JudgeVerdict judge_pairwise(Gateway& gateway, const PromptLibrary& prompts, const Trajectory& traj_a,
                            const Trajectory& traj_b, const ChatCircumstance& circumstance,
                            const ChatEndpointConfig& judge, std::uint64_t rng_seed, std::string pair_id,
                            int max_attempts) {
  return judge_pairwise_presented(gateway, prompts, traj_a, traj_b, circumstance, judge,
                                  presentation_first(rng_seed), rng_seed, std::move(pair_id), max_attempts);
}

JudgeVerdict judge_pairwise_presented(Gateway& gateway, const PromptLibrary& prompts,
                                      const Trajectory& traj_a, const Trajectory& traj_b,
                                      const ChatCircumstance& circumstance,
                                      const ChatEndpointConfig& judge, Side presented_first,
                                      std::uint64_t rng_seed, std::string pair_id, int max_attempts) {
  if (traj_a.circumstance_id != traj_b.circumstance_id) {
    throw ValidationError("trajectories come from different circumstances: " + traj_a.circumstance_id +
                          " vs " + traj_b.circumstance_id);
  }
  if (traj_a.circumstance_id != circumstance.id) {
    throw ValidationError("trajectories do not belong to circumstance " + circumstance.id);
  }
  const bool a_first = presented_first == Side::A;
  const Trajectory& first = a_first ? traj_a : traj_b;
  const Trajectory& second = a_first ? traj_b : traj_a;

  auto parsed = ask_until_parsed(gateway, judge, build_pairwise_messages(prompts, circumstance, first, second),
                                 max_attempts, derive_seed(rng_seed, {fnv1a64("judge")}),
                                 [](const std::string& text) { return reward::parse_pairwise_reply(text); });
  const reward::PairwiseReply& r = parsed.value;

  JudgeVerdict v;
  v.pair_id = std::move(pair_id);
  v.presented_first = presented_first;
  switch (r.winner) {
    case reward::PresentedWinner::tie: v.winner = Outcome::tie; break;
    case reward::PresentedWinner::first: v.winner = a_first ? Outcome::A : Outcome::B; break;
    case reward::PresentedWinner::second: v.winner = a_first ? Outcome::B : Outcome::A; break;
  }
  v.analysis_a = a_first ? r.analysis_first : r.analysis_second;
  v.analysis_b = a_first ? r.analysis_second : r.analysis_first;
  v.comparison = r.comparison;
  v.judge_model_id = judge.model_name;
  v.attempts = parsed.attempts;
  v.repaired = r.repaired;
  return v;
}

}  // namespace cpo::gateway
