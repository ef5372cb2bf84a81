#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "cpo/core/error.hpp"
#include "cpo/core/types.hpp"
#include "cpo/gateway/chat.hpp"
#include "cpo/gateway/template.hpp"

namespace cpo::gateway {

inline constexpr int kDefaultJudgeAttempts = 3;

template <class T>
struct Parsed {
  T value;
  int attempts = 1;
  std::string raw_reply;
};

// Asks the judge and parses the reply. A reply that throws JudgeOutputError
// is fed back to the judge with the parse error, up to max_attempts asks in
// total; the last failure is rethrown with the attempt count. Transport
// errors propagate unchanged.
template <class Parse>
auto ask_until_parsed(Gateway& gateway, const ChatEndpointConfig& judge, Messages messages,
                      int max_attempts, std::optional<std::uint64_t> seed, Parse parse)
    -> Parsed<decltype(parse(std::string{}))> {
  if (max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
  std::string last_error;
  std::string last_reply;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    ChatReply reply = gateway.chat(judge, messages, seed);
    try {
      return {parse(reply.text), attempt, reply.text};
    } catch (const JudgeOutputError& e) {
      last_error = e.what();
      last_reply = reply.text;
      messages.push_back({"assistant", reply.text});
      messages.push_back({"user", "Your previous reply could not be parsed (" + last_error +
                                      "). Reply again with only the JSON object in the required format."});
    }
  }
  throw JudgeOutputError("judge output unusable after " + std::to_string(max_attempts) +
                             " attempts: " + last_error,
                         max_attempts, last_reply);
}

// "1. Name: text" lines, one per turn, bot turns labeled with the character.
std::string render_dialogue(const Trajectory& t, const std::string& char_name);

// Which true side the seed puts in the <Dialogue A> slot.
Side presentation_first(std::uint64_t rng_seed);

Messages build_pairwise_messages(const PromptLibrary& prompts, const ChatCircumstance& c,
                                 const Trajectory& shown_first, const Trajectory& shown_second);

// Blind pairwise comparison. The presentation order is drawn from rng_seed
// and the judge's answer is mapped back to true labels.
JudgeVerdict judge_pairwise(Gateway& gateway, const PromptLibrary& prompts, const Trajectory& traj_a,
                            const Trajectory& traj_b, const ChatCircumstance& circumstance,
                            const ChatEndpointConfig& judge, std::uint64_t rng_seed,
                            std::string pair_id = {}, int max_attempts = kDefaultJudgeAttempts);

// Same with an explicit presentation order.
JudgeVerdict judge_pairwise_presented(Gateway& gateway, const PromptLibrary& prompts,
                                      const Trajectory& traj_a, const Trajectory& traj_b,
                                      const ChatCircumstance& circumstance,
                                      const ChatEndpointConfig& judge, Side presented_first,
                                      std::uint64_t rng_seed, std::string pair_id = {},
                                      int max_attempts = kDefaultJudgeAttempts);

}  // namespace cpo::gateway
