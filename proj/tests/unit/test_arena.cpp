#include <doctest.h>

#include <fstream>
#include <map>
#include <set>

#include "cpo/analytics/stats.hpp"
#include "cpo/arena/engine.hpp"
#include "cpo/core/json.hpp"
#include "cpo/gateway/judge.hpp"
#include "cpo/gateway/transports.hpp"
#include "helpers.hpp"

using namespace cpo;
using namespace cpo::arena;

namespace {

std::string section(const std::string& prompt, const std::string& tag) {
  const auto open = prompt.rfind("<" + tag + ">");
  const auto close = prompt.rfind("</" + tag + ">");
  return prompt.substr(open, close - open);
}

std::shared_ptr<gateway::ScriptedTransport> pattern(const std::string& reply) {
  return std::make_shared<gateway::ScriptedTransport>(nlohmann::json{{"mode", "pattern"}, {"reply", reply}});
}

TournamentPlan two_model_plan(std::size_t k) {
  TournamentPlan p;
  p.models["alpha"] = gateway::rollout_defaults("mock://alpha", "alpha");
  p.models["beta"] = gateway::rollout_defaults("mock://beta", "beta");
  p.user_simulator = gateway::rollout_defaults("mock://user", "user");
  p.judge = test::mock_endpoint("judge", "judge");
  p.corpus = "inline";
  p.k_matchups = k;
  p.n_turns = 2;
  p.master_seed = 11;
  return p;
}

std::vector<ChatCircumstance> corpus_of(std::size_t n) {
  std::vector<ChatCircumstance> c;
  for (std::size_t i = 1; i <= n; ++i) c.push_back(test::make_circumstance("c" + std::to_string(i)));
  return c;
}

std::string fixed_clock() { return "2025-01-01T00:00:00Z"; }

}  // namespace

TEST_CASE("plan covers every pair with k entries") {
  TournamentPlan p = two_model_plan(7);
  p.models["gamma"] = gateway::rollout_defaults("mock://gamma", "gamma");
  const auto plan = plan_matchups(p, corpus_of(5));
  CHECK(plan.size() == 21);
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> by_pair;
  std::set<std::string> ids;
  for (const auto& e : plan) {
    CHECK(e.model_a < e.model_b);
    by_pair[{e.model_a, e.model_b}].push_back(e.circumstance_id);
    ids.insert(e.pair_id);
  }
  CHECK(ids.size() == 21);
  CHECK(by_pair.size() == 3);
  for (const auto& [pair, cs] : by_pair) {
    CHECK(cs.size() == 7);
    // The first five draws exhaust the corpus before any repeat.
    CHECK(std::set<std::string>(cs.begin(), cs.begin() + 5).size() == 5);
  }
  CHECK(plan == plan_matchups(p, corpus_of(5)));
  p.master_seed = 12;
  CHECK(plan != plan_matchups(p, corpus_of(5)));
}

TEST_CASE("plan json round trip") {
  const auto p = two_model_plan(3);
  CHECK(nlohmann::json(p).get<TournamentPlan>() == p);
}

TEST_CASE("simulated dialogue has the required structure") {
  gateway::Gateway gw;
  gw.register_transport("alpha", pattern("bot says {turn}"));
  gw.register_transport("user", pattern("user says {turn}"));
  const auto p = two_model_plan(1);
  const auto t = simulate_dialogue(gw, {}, p.models.at("alpha"), p.user_simulator, test::make_circumstance("c1"), 3,
                                   5, "alpha", fixed_clock);
  REQUIRE(t.turns.size() == 7);
  CHECK(t.turns[0].text == test::make_circumstance("c1").opening_line);
  CHECK(t.turns[1].text == "user says 1");
  CHECK(t.turns[2].text == "bot says 1");
  CHECK(t.turns[6].text == "bot says 3");
  CHECK(t.created_at == fixed_clock());
}

TEST_CASE("blank reply is re-asked once, then fails") {
  gateway::Gateway gw;
  gw.register_transport("user", pattern("hi"));
  gw.register_transport("alpha", std::make_shared<gateway::ScriptedTransport>(
                                     nlohmann::json{{"mode", "queue"}, {"replies", {"  ", "fine"}}}));
  const auto p = two_model_plan(1);
  const auto t = simulate_dialogue(gw, {}, p.models.at("alpha"), p.user_simulator, test::make_circumstance("c1"), 1,
                                   5, "alpha");
  CHECK(t.turns[2].text == "fine");
  gw.register_transport("alpha", std::make_shared<gateway::ScriptedTransport>(
                                     nlohmann::json{{"mode", "queue"}, {"replies", {"", " "}}}));
  CHECK_THROWS(simulate_dialogue(gw, {}, p.models.at("alpha"), p.user_simulator, test::make_circumstance("c1"), 1, 5,
                                 "alpha"));
}

TEST_CASE("bot and simulator see mirrored roles") {
  const gateway::PromptLibrary prompts;
  const auto c = test::make_circumstance("c1");
  const std::vector<Turn> turns{{Role::bot, "open", 0}, {Role::user, "u", 1}};
  const auto b = bot_messages(prompts, c, turns);
  const auto u = user_sim_messages(prompts, c, turns);
  CHECK(b[0].role == "system");
  CHECK(b[0].content.find(c.profile.profile_text) != std::string::npos);
  CHECK(b[1].role == "assistant");
  CHECK(b[2].role == "user");
  CHECK(u[1].role == "user");
  CHECK(u[2].role == "assistant");
}

TEST_CASE("order-blind judge picks the longer-reply bot in both orders") {
  gateway::Gateway gw;
  gw.register_transport("judge", std::make_shared<gateway::ScriptedTransport>(nlohmann::json{{"mode", "length_judge"}}));
  const auto c = test::make_circumstance("c1");
  const auto a = test::make_trajectory("alpha", {"short"});
  const auto b = test::make_trajectory("beta", {"a much longer reply with many words"});
  for (Side first : {Side::A, Side::B}) {
    const auto v = gateway::judge_pairwise_presented(gw, {}, a, b, c, test::mock_endpoint("judge"), first, 1, "m1");
    CHECK(v.winner == Outcome::B);
    CHECK(v.presented_first == first);
  }
  const auto tie = gateway::judge_pairwise(gw, {}, a, a, c, test::mock_endpoint("judge"), 3, "m2");
  CHECK(tie.winner == Outcome::tie);
}

TEST_CASE("a position-biased judge is unmapped through the presentation order") {
  gateway::Gateway gw;
  gw.register_transport("judge", std::make_shared<gateway::ScriptedTransport>(nlohmann::json{
                                     {"mode", "queue"}, {"cycle", true}, {"replies", {R"({"rank": "A"})"}}}));
  const auto c = test::make_circumstance("c1");
  const auto a = test::make_trajectory("alpha", {"x"});
  const auto b = test::make_trajectory("beta", {"y"});
  auto v = gateway::judge_pairwise_presented(gw, {}, a, b, c, test::mock_endpoint("judge"), Side::B, 1);
  CHECK(v.winner == Outcome::B);
  v = gateway::judge_pairwise_presented(gw, {}, a, b, c, test::mock_endpoint("judge"), Side::A, 1);
  CHECK(v.winner == Outcome::A);
}

TEST_CASE("pairwise prompt labels dialogues and hides model ids") {
  const gateway::PromptLibrary prompts;
  const auto c = test::make_circumstance("c1", "Mara");
  const auto a = test::make_trajectory("alpha-model", {"first"});
  const auto b = test::make_trajectory("beta-model", {"second"});
  const auto m = gateway::build_pairwise_messages(prompts, c, b, a);
  const auto& p = m.back().content;
  CHECK(section(p, "Dialogue A").find("second") != std::string::npos);
  CHECK(section(p, "Dialogue B").find("first") != std::string::npos);
  CHECK(p.find("alpha-model") == std::string::npos);
  CHECK(p.find("Mara: first") != std::string::npos);
}

TEST_CASE("fixture verdicts A, A, B, tie give 2 wins, 1 tie, 1 loss") {
  // The judge decides in true labels per circumstance and answers in
  // presentation labels, so the engine's unmapping is exercised.
  const std::map<std::string, std::string> truth{{"c1", "alpha"}, {"c2", "alpha"}, {"c3", "beta"}, {"c4", "tie"}};
  gateway::Gateway gw;
  gw.register_transport("alpha", pattern("alpha line {turn}"));
  gw.register_transport("beta", pattern("beta line {turn}"));
  gw.register_transport("user", pattern("go on"));
  gw.register_transport("judge", std::make_shared<gateway::CallbackTransport>(
                                     [&](const gateway::ChatEndpointConfig&, const gateway::Messages& m,
                                         std::optional<std::uint64_t>) {
                                       const auto& p = m.back().content;
                                       std::string want = "tie";
                                       for (const auto& [cid, w] : truth) {
                                         if (p.find("scene of " + cid + ".") != std::string::npos) want = w;
                                       }
                                       std::string rank = "Tie";
                                       if (want != "tie") {
                                         rank = section(p, "Dialogue A").find(want + " line") != std::string::npos
                                                    ? "A"
                                                    : "B";
                                       }
                                       return nlohmann::json{{"rank", rank}}.dump();
                                     }));
  auto corpus = corpus_of(4);
  for (auto& c : corpus) c.scenario_text = "scene of " + c.id + ".";
  const auto outcome = run_tournament(gw, {}, two_model_plan(4), corpus, {2, std::nullopt, fixed_clock});
  REQUIRE(outcome.failures.empty());
  CHECK(outcome.matrix.counts[0][1] == OutcomeCounts{2, 1, 1});
  CHECK(outcome.matrix.counts[1][0] == OutcomeCounts{1, 1, 2});
  CHECK(*outcome.matrix.rates[0][1] == doctest::Approx(2.5 / 4));
  std::set<Side> orders;
  for (const auto& r : outcome.results) orders.insert(r.verdict.presented_first);
  CHECK(orders.size() == 2);
}

TEST_CASE("a failing matchup is isolated") {
  gateway::Gateway gw;
  gw.register_transport("alpha", pattern("alpha {turn}"));
  gw.register_transport("beta", std::make_shared<gateway::ScriptedTransport>(
                                    nlohmann::json{{"mode", "queue"}, {"replies", {"only one"}}}));
  gw.register_transport("user", pattern("go on"));
  gw.register_transport("judge", std::make_shared<gateway::ScriptedTransport>(nlohmann::json{{"mode", "length_judge"}}));
  auto plan = two_model_plan(3);
  plan.n_turns = 1;
  plan.models["beta"].max_retries = 0;
  const auto outcome = run_tournament(gw, {}, plan, corpus_of(3), {1, std::nullopt, fixed_clock});
  CHECK(outcome.results.size() == 1);
  REQUIRE(outcome.failures.size() == 2);
  CHECK(outcome.failures[0].stage == "simulate_b");
  CHECK(outcome.every_pair_has_data);
  CHECK(outcome.manifest["matchups_completed"] == 1);
}

TEST_CASE("run directory layout and reload") {
  test::TempDir dir;
  gateway::Gateway gw(test::fixture_dir() / "toy");
  const auto plan_path = test::fixture_dir() / "toy" / "plan.json";
  const auto plan = read_json_file(plan_path).get<TournamentPlan>();
  const auto corpus = load_corpus(test::fixture_dir() / "toy" / "corpus.jsonl");
  TournamentOptions opts{3, dir.path(), fixed_clock};
  const auto outcome = run_tournament(gw, {}, plan, corpus, opts);
  for (const char* f : {"plan.json", "matrix.json", "manifest.json", "verdicts.jsonl", "circumstances.jsonl"}) {
    CHECK(std::filesystem::exists(dir.path() / f));
  }
  CHECK(std::filesystem::exists(dir.path() / "trajectories" / "m0001.jsonl"));
  const auto reloaded = load_run_results(dir.path());
  CHECK(reloaded == outcome.results);
  const auto manifest = read_json_file(dir.path() / "manifest.json");
  CHECK(manifest["master_seed"] == plan.master_seed);
  CHECK(manifest["matchups_planned"] == 12);
}
