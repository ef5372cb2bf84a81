#include <doctest.h>

#include <fstream>

#include "cpo/gateway/template.hpp"
#include "helpers.hpp"

using namespace cpo;
using namespace cpo::gateway;

TEST_CASE("placeholders are identifiers in braces") {
  const auto t = PromptTemplate::from_body("t", R"(Hi {name}, {"json": {x}} { not } {1bad} {_ok})");
  CHECK(t.required_placeholders == std::set<std::string>{"name", "x", "_ok"});
  CHECK(render(t, {{"name", "Ann"}, {"x", "1"}, {"_ok", "!"}}) == R"(Hi Ann, {"json": 1} { not } {1bad} !)");
}

TEST_CASE("unbound placeholder names the variable") {
  const auto t = PromptTemplate::from_body("t", "{a} {b}");
  try {
    render(t, {{"a", "1"}});
    FAIL("expected an error");
  } catch (const UnboundPlaceholderError& e) {
    CHECK(e.name() == "b");
  }
}

TEST_CASE("bound values are not rescanned") {
  const auto t = PromptTemplate::from_body("t", "{a}");
  CHECK(render(t, {{"a", "{b}"}, {"b", "no"}}) == "{b}");
}

TEST_CASE("built-in prompts carry their placeholders") {
  const PromptLibrary lib;
  const auto& reward = lib.get(prompt_ids::kRewardGroup);
  for (const char* p : {"char_name", "char_profile", "chat_scenario", "messages", "samples"}) {
    CHECK(reward.required_placeholders.count(p) == 1);
  }
  const auto& arena = lib.get(prompt_ids::kArenaJudge);
  for (const char* p : {"char_name", "char_profile", "scene_desc", "dialogue_a", "dialogue_b"}) {
    CHECK(arena.required_placeholders.count(p) == 1);
  }
  CHECK(lib.contains(prompt_ids::kCharacterBot));
  CHECK(lib.contains(prompt_ids::kUserSimulator));
  CHECK(&lib.criterion("") == &reward);
  CHECK(&lib.criterion("attractiveness") == &reward);
  CHECK_THROWS(lib.criterion("no-such-criterion"));
}

TEST_CASE("directory overrides built-ins") {
  test::TempDir dir;
  std::ofstream(dir.path() / "arena_judge.txt") << "custom {dialogue_a}";
  std::ofstream(dir.path() / "consistency.txt") << "judge {samples}";
  PromptLibrary lib;
  lib.load_directory(dir.path());
  CHECK(lib.get(prompt_ids::kArenaJudge).body == "custom {dialogue_a}");
  CHECK(lib.criterion("consistency").body == "judge {samples}");
}
