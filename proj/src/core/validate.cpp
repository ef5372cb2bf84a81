#include "cpo/core/validate.hpp"

#include <algorithm>

#include "cpo/core/error.hpp"

namespace cpo {

ValidationResult validate_trajectory(const Trajectory& t, std::size_t n_turns) {
  const auto& turns = t.turns;
  if (turns.empty()) return ValidationResult::reject("trajectory has no turns", 0);
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const Role expected = (i % 2 == 0) ? Role::bot : Role::user;
    if (turns[i].index != i) {
      return ValidationResult::reject("turn index " + std::to_string(turns[i].index) +
                                          " at position " + std::to_string(i),
                                      i);
    }
    if (turns[i].role != expected) {
      if (i == 0) return ValidationResult::reject("missing bot opening line", 0);
      return ValidationResult::reject("expected " + std::string(to_string(expected)) +
                                          " turn, found " +
                                          std::string(to_string(turns[i].role)),
                                      i);
    }
    if (turns[i].text.empty()) return ValidationResult::reject("empty turn text", i);
  }
  const std::size_t expected_len = 2 * n_turns + 1;
  if (turns.size() != expected_len) {
    // Too long: the first surplus turn offends. Too short: the first missing one.
    const std::size_t at = std::min(turns.size(), expected_len);
    return ValidationResult::reject("expected " + std::to_string(expected_len) +
                                        " turns for " + std::to_string(n_turns) +
                                        " exchanges, found " + std::to_string(turns.size()),
                                    at);
  }
  return ValidationResult::accept();
}

void validate(const CharacterProfile& p) {
  if (p.id.empty()) throw ValidationError("character profile id is empty");
  if (p.profile_text.empty())
    throw ValidationError("character profile '" + p.id + "' has empty profile_text");
}

void validate(const ChatCircumstance& c) {
  validate(c.profile);
  if (c.scenario_text.empty())
    throw ValidationError("circumstance '" + c.id + "' has empty scenario_text");
  if (c.opening_line.empty())
    throw ValidationError("circumstance '" + c.id + "' has empty opening_line");
}

void validate(const QueryContext& q) {
  validate(q.profile);
  if (q.history.empty()) throw ValidationError("query history is empty");
  if (q.history.back().role != Role::user)
    throw ValidationError("query history must end with a user turn");
}

void validate(const TokenTrace& trace, std::size_t length_tokens) {
  auto check = [&](const std::vector<double>& v, const char* name) {
    if (v.size() != length_tokens)
      throw ValidationError(std::string(name) + " has " + std::to_string(v.size()) +
                            " entries, expected " + std::to_string(length_tokens));
    for (double x : v) {
      if (!(x <= 0.0)) throw ValidationError(std::string(name) + " contains a positive or NaN log-probability");
    }
  };
  check(trace.logp_new, "logp_new");
  check(trace.logp_old, "logp_old");
  if (trace.logp_ref) check(*trace.logp_ref, "logp_ref");
}

void validate(const ResponseGroup& g, std::size_t min_size) {
  if (g.candidates.size() < min_size)
    throw ValidationError("group has " + std::to_string(g.candidates.size()) +
                          " candidates, need at least " + std::to_string(min_size));
  for (std::size_t i = 0; i < g.candidates.size(); ++i) {
    const auto& c = g.candidates[i];
    if (c.index != i + 1)
      throw ValidationError("candidate indices must be 1..G in order; position " +
                            std::to_string(i + 1) + " has index " + std::to_string(c.index));
    if (c.length_tokens && *c.length_tokens == 0 && !c.text.empty())
      throw ValidationError("candidate " + std::to_string(c.index) +
                            " has nonempty text but zero length_tokens");
    if (c.token_trace && c.length_tokens) validate(*c.token_trace, *c.length_tokens);
  }
}

}  // namespace cpo
