#include "cpo/core/types.hpp"

#include <cctype>

#include "cpo/core/error.hpp"

namespace cpo {

std::string_view to_string(Role role) { return role == Role::user ? "user" : "bot"; }

std::string_view to_string(Side side) { return side == Side::A ? "A" : "B"; }

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::A: return "A";
    case Outcome::B: return "B";
    case Outcome::tie: return "tie";
  }
  return "tie";
}

Role role_from_string(std::string_view s) {
  if (s == "user") return Role::user;
  if (s == "bot") return Role::bot;
  throw SchemaError("unknown role '" + std::string(s) + "'");
}

Side side_from_string(std::string_view s) {
  if (s == "A") return Side::A;
  if (s == "B") return Side::B;
  throw SchemaError("unknown side '" + std::string(s) + "'");
}

Outcome outcome_from_string(std::string_view s) {
  if (s == "A") return Outcome::A;
  if (s == "B") return Outcome::B;
  if (s == "tie") return Outcome::tie;
  throw SchemaError("unknown outcome '" + std::string(s) + "'");
}

std::optional<std::size_t> WinRateMatrix::index_of(std::string_view model_id) const {
  for (std::size_t i = 0; i < model_ids.size(); ++i) {
    if (model_ids[i] == model_id) return i;
  }
  return std::nullopt;
}

std::size_t word_count(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  return words;
}

}  // namespace cpo
