#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "cpo/core/types.hpp"

namespace cpo {

struct ValidationResult {
  bool ok = true;
  // First turn index that violates the structure, when applicable.
  std::optional<std::size_t> offending_index;
  std::string message;

  explicit operator bool() const { return ok; }
  static ValidationResult accept() { return {}; }
  static ValidationResult reject(std::string message,
                                 std::optional<std::size_t> index = std::nullopt) {
    return {false, index, std::move(message)};
  }
};

// Accepts iff turns[0] is the bot opening line, roles alternate afterwards,
// indices run 0..2N and there are exactly N user turns and N+1 bot turns.
ValidationResult validate_trajectory(const Trajectory& t, std::size_t n_turns);

// Throwing validators used at module boundaries.
void validate(const CharacterProfile& p);
void validate(const ChatCircumstance& c);
void validate(const QueryContext& q);
void validate(const TokenTrace& trace, std::size_t length_tokens);
void validate(const ResponseGroup& g, std::size_t min_size = 2);

}  // namespace cpo
