#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "cpo/core/error.hpp"

namespace cpo::gateway {

class UnboundPlaceholderError : public Error {
 public:
  explicit UnboundPlaceholderError(std::string name)
      : Error("unbound placeholder {" + name + "}"), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

using Bindings = std::map<std::string, std::string, std::less<>>;

// Placeholders are {identifier} with identifier = [A-Za-z_][A-Za-z0-9_]*.
// Every other brace is literal text, so JSON examples inside a template need
// no escaping.
struct PromptTemplate {
  std::string id;
  std::string body;
  std::set<std::string> required_placeholders;

  static PromptTemplate from_body(std::string id, std::string body);
};

// Single-pass substitution; bound values are never rescanned. Extra bindings
// are ignored.
std::string render(const PromptTemplate& tmpl, const Bindings& bindings);

// Named templates. Built-ins are compiled in from prompts/*.txt; a directory
// of <id>.txt files can override or extend them.
class PromptLibrary {
 public:
  PromptLibrary();  // built-ins only

  void load_directory(const std::filesystem::path& dir);
  void add(PromptTemplate tmpl);
  const PromptTemplate& get(std::string_view id) const;
  bool contains(std::string_view id) const;

  // Group-scoring template for an evaluation criterion; "attractiveness"
  // (and the empty id) map to the built-in reward_group template.
  const PromptTemplate& criterion(std::string_view criterion_id) const;

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

namespace prompt_ids {
inline constexpr std::string_view kRewardGroup = "reward_group";
inline constexpr std::string_view kArenaJudge = "arena_judge";
inline constexpr std::string_view kCharacterBot = "character_bot";
inline constexpr std::string_view kUserSimulator = "user_simulator";
}  // namespace prompt_ids

}  // namespace cpo::gateway
