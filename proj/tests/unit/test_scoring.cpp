#include <doctest.h>

#include <regex>

#include "cpo/gateway/transports.hpp"
#include "cpo/reward/pipeline.hpp"
#include "cpo/reward/scoring.hpp"
#include "helpers.hpp"

using namespace cpo;
using namespace cpo::reward;

namespace {

// Judge that reads "score=x" from each rendered sample.
std::string echo_judge(const gateway::Messages& messages) {
  const std::string& prompt = messages.front().content;
  const std::regex re(R"(\[(\d+)\] score=([0-9.]+))");
  std::vector<double> scores;
  for (auto it = std::sregex_iterator(prompt.begin(), prompt.end(), re); it != std::sregex_iterator(); ++it) {
    scores.push_back(std::stod((*it)[2]));
  }
  return test::group_reply(scores);
}

struct Fixture {
  gateway::Gateway gw;
  gateway::PromptLibrary prompts;
  std::vector<gateway::Messages> requests;

  Fixture() {
    gw.register_transport("echo", std::make_shared<gateway::CallbackTransport>(
                                      [this](const gateway::ChatEndpointConfig&, const gateway::Messages& m,
                                             std::optional<std::uint64_t>) {
                                        requests.push_back(m);
                                        return echo_judge(m);
                                      }));
  }
};

}  // namespace

TEST_CASE("rendering") {
  CHECK(render_samples({"a", "b"}) == "[1] a\n\n[2] b");
  const auto h = render_history(test::make_context("Mara"));
  CHECK(h == "Mara: (opens the door) You'd best come in.\nUser: Thank you. Can I stay?");
}

TEST_CASE("group prompt carries profile, scenario, history and samples") {
  const gateway::PromptLibrary prompts;
  const auto msgs = build_group_messages(prompts, test::make_context("Mara"), {"first", "second"});
  REQUIRE(msgs.size() == 1);
  const auto& p = msgs[0].content;
  CHECK(p.find("Mara keeps a lighthouse") != std::string::npos);
  CHECK(p.find("A storm strands a traveler") != std::string::npos);
  CHECK(p.find("User: Thank you. Can I stay?") != std::string::npos);
  CHECK(p.find("[2] second") != std::string::npos);
  CHECK(p.find(R"({"1": {"analysis": " ", "rank": 3, "score": 0.78}})") != std::string::npos);
}

TEST_CASE("score_group maps scores to candidates and applies length penalty") {
  Fixture f;
  const auto g = test::make_group({"score=0.9", "score=0.5", "score=0.7"}, {10, 130, 98});
  const auto r = score_group(f.gw, f.prompts, g, test::mock_endpoint("echo"));
  CHECK(r.report.scores() == std::vector<double>{0.9, 0.5, 0.7});
  CHECK(r.rewards.final_reward[0] == doctest::Approx(0.9));
  CHECK(r.rewards.final_reward[1] == 0.0);
  CHECK(r.rewards.final_reward[2] == doctest::Approx(0.7 - 0.234375));
  CHECK(f.requests.size() == 1);
}

TEST_CASE("shuffled presentation is mapped back to original indices") {
  Fixture f;
  std::vector<std::string> texts;
  for (int i = 0; i < 8; ++i) texts.push_back("score=0." + std::to_string(i + 1));
  const auto g = test::make_group(texts, std::vector<std::size_t>(8, 5));
  ScoringOptions opts;
  opts.shuffle_candidates = true;
  opts.shuffle_seed = 99;
  const auto r = score_group(f.gw, f.prompts, g, test::mock_endpoint("echo"), opts);
  std::vector<std::size_t> identity{1, 2, 3, 4, 5, 6, 7, 8};
  CHECK(r.presentation_order != identity);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(r.report.entries[i].index == i + 1);
    CHECK(r.report.entries[i].score == doctest::Approx(0.1 * (i + 1)));
  }
}

TEST_CASE("group of one is rejected before any judge call") {
  Fixture f;
  CHECK_THROWS_AS(score_group(f.gw, f.prompts, test::make_group({"score=0.5"}), test::mock_endpoint("echo")),
                  ValidationError);
  CHECK(f.requests.empty());
}

TEST_CASE("samplewise scoring shows one candidate") {
  Fixture f;
  const auto g = test::make_group({"score=0.25"});
  CHECK(score_samplewise(f.gw, f.prompts, g.context, g.candidates[0], test::mock_endpoint("echo")) == 0.25);
}

TEST_CASE("unusable judge fails after three attempts") {
  gateway::Gateway gw;
  gw.register_transport("bad", std::make_shared<gateway::ScriptedTransport>(
                                   nlohmann::json{{"mode", "queue"}, {"replies", {"nope"}}, {"cycle", true}}));
  try {
    score_group(gw, {}, test::make_group({"a", "b"}), test::mock_endpoint("bad"));
    FAIL("expected an error");
  } catch (const JudgeOutputError& e) {
    CHECK(e.attempts() == 3);
  }
}

TEST_CASE("pipeline record") {
  Fixture f;
  const auto g = test::make_group({"score=1.0", "score=0.0"}, {5, 5});
  const auto out = run_score_pipeline(f.gw, f.prompts, g, test::mock_endpoint("echo"), {}, {});
  CHECK(out.advantages[0] == doctest::Approx(1.0));
  CHECK(out.advantages[1] == doctest::Approx(-1.0));
  const auto j = to_json(out, "g7");
  CHECK(j["group_id"] == "g7");
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["diagnostics"]["repaired"] == false);
  CHECK(j["rewards"]["final"].size() == 2);
}

TEST_CASE("score request parsing") {
  const auto body = nlohmann::json::parse(R"({
    "context": {"profile": {"id": "p", "name": "N", "profile_text": "t"}, "history": []},
    "candidates": [{"text": "a", "length_tokens": 4}, {"text": "b"}],
    "length_config": {"l_max": 64, "l_cache": 16}})");
  const auto req = parse_score_request(body);
  CHECK(req.group.size() == 2);
  CHECK(req.group.candidates[1].index == 2);
  REQUIRE(req.length_config);
  CHECK(req.length_config->l_max == 64);
  CHECK_THROWS_AS(parse_score_request(nlohmann::json::parse(R"({"candidates": []})")), SchemaError);
}
