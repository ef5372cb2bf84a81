#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "cpo/gateway/judge.hpp"
#include "cpo/gateway/transports.hpp"
#include "cpo/reward/judge_output.hpp"
#include "helpers.hpp"

using namespace cpo;
using namespace cpo::gateway;

namespace {

std::shared_ptr<ScriptedTransport> scripted(const char* spec) {
  return std::make_shared<ScriptedTransport>(nlohmann::json::parse(spec));
}

}  // namespace

TEST_CASE("endpoint config defaults and validation") {
  const auto r = rollout_defaults("http://x", "m");
  CHECK(r.temperature == 1.0);
  CHECK(r.top_p == 1.0);
  const auto j = judge_defaults("http://x", "m");
  CHECK(j.temperature == 0.0);
  auto bad = j;
  bad.base_url.clear();
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_THROWS_AS((nlohmann::json{{"base_url", "http://x"}, {"model_name", "m"}, {"api_key", "sk"}}
                       .get<ChatEndpointConfig>()),
                  SchemaError);
  const auto round = nlohmann::json(j).get<ChatEndpointConfig>();
  CHECK(round == j);
}

TEST_CASE("retryable failures are retried with exponential backoff") {
  Gateway gw;
  std::vector<long> sleeps;
  gw.set_sleep([&](std::chrono::milliseconds d) { sleeps.push_back(static_cast<long>(d.count())); });
  auto t = scripted(R"({"mode": "queue", "replies": ["ok"], "fail_first": 2, "fail_kind": "rate_limited"})");
  gw.register_transport("t", t);
  auto ep = test::mock_endpoint("t");
  ep.backoff_base = std::chrono::milliseconds(10);
  const auto reply = gw.chat(ep, {{"user", "hi"}});
  CHECK(reply.text == "ok");
  CHECK(reply.retries == 2);
  CHECK(sleeps == std::vector<long>{10, 20});
}

TEST_CASE("retries exhausted carries the trace") {
  Gateway gw;
  gw.register_transport("t", scripted(R"({"mode": "queue", "replies": ["ok"], "fail_first": 10})"));
  auto ep = test::mock_endpoint("t");
  ep.max_retries = 2;
  try {
    gw.chat(ep, {{"user", "hi"}});
    FAIL("expected an error");
  } catch (const RetriesExhaustedError& e) {
    CHECK(e.attempts() == 3);
    CHECK(e.trace().size() == 3);
    CHECK(e.kind() == TransportErrorKind::server);
  }
}

TEST_CASE("auth errors are not retried") {
  Gateway gw;
  auto t = scripted(R"({"mode": "queue", "replies": ["ok"], "fail_first": 1, "fail_kind": "auth"})");
  gw.register_transport("t", t);
  CHECK_THROWS_AS(gw.chat(test::mock_endpoint("t"), {{"user", "hi"}}), TransportError);
  CHECK(t->calls() == 1);
}

TEST_CASE("unknown mock transport fails") {
  Gateway gw;
  CHECK_THROWS(gw.chat(test::mock_endpoint("nope"), {{"user", "hi"}}));
}

TEST_CASE("scripted queue, pattern and fingerprint modes") {
  Gateway gw;
  gw.register_transport("q", scripted(R"({"mode": "queue", "replies": ["a", "b"]})"));
  CHECK(gw.chat(test::mock_endpoint("q"), {}).text == "a");
  CHECK(gw.chat(test::mock_endpoint("q"), {}).text == "b");
  CHECK_THROWS_AS(gw.chat(test::mock_endpoint("q"), {}), TransportError);

  gw.register_transport("p", scripted(R"({"mode": "pattern", "reply": "turn {turn} by {model}"})"));
  CHECK(gw.chat(test::mock_endpoint("p", "bot"), {{"system", "s"}, {"user", "1"}, {"user", "2"}}).text ==
        "turn 2 by bot");

  const Messages msgs{{"user", "hello"}};
  const std::string fp = request_fingerprint("m", msgs);
  CHECK(fp.size() == 64);
  CHECK(fp != request_fingerprint("m2", msgs));
  gw.register_transport("f", std::make_shared<ScriptedTransport>(
                                 nlohmann::json{{"mode", "fingerprint"}, {"replies", {{fp, "recorded"}}}}));
  CHECK(gw.chat(test::mock_endpoint("f"), msgs).text == "recorded");
  CHECK_THROWS_AS(gw.chat(test::mock_endpoint("f"), {{"user", "other"}}), TransportError);
}

TEST_CASE("scripted transport from file relative to gateway base") {
  Gateway gw(test::fixture_dir() / "toy");
  auto ep = judge_defaults("scripted:mocks/beta.json", "beta");
  CHECK(gw.chat(ep, {{"user", "x"}}).text == "(nods) okay 1");
}

TEST_CASE("length judge rule") {
  CHECK(length_judge_rank("<Dialogue A>long text</Dialogue A><Dialogue B>short</Dialogue B>") == "A");
  CHECK(length_judge_rank("<Dialogue A>s</Dialogue A><Dialogue B>longer</Dialogue B>") == "B");
  CHECK(length_judge_rank("<Dialogue A>same</Dialogue A><Dialogue B>same</Dialogue B>") == "Tie");
  CHECK(length_judge_rank("<Dialogue A>abcd</Dialogue A><Dialogue B>abc</Dialogue B>", 2) == "Tie");
}

TEST_CASE("wire format") {
  auto ep = rollout_defaults("http://localhost:1/v1", "model-x");
  const auto body = chat_request_body(ep, {{"user", "hi"}}, 0xffffffffffULL);
  CHECK(body["model"] == "model-x");
  CHECK(body["messages"][0]["content"] == "hi");
  CHECK(body["seed"] == 0x7fffffff);
  CHECK(body["temperature"] == 1.0);

  const auto reply = parse_chat_response(
      R"({"choices": [{"message": {"role": "assistant", "content": "yo"}}], "usage": {"prompt_tokens": 3, "completion_tokens": 1}})");
  CHECK(reply.text == "yo");
  CHECK(reply.usage.reported);
  CHECK(reply.usage.completion_tokens == 1);
  CHECK_THROWS_AS(parse_chat_response("not json"), TransportError);
  CHECK_THROWS_AS(parse_chat_response(R"({"choices": []})"), TransportError);
}

TEST_CASE("http transport reports a missing key variable as auth error") {
  auto ep = rollout_defaults("http://127.0.0.1:1/v1", "m");
  ep.api_key_env = "CPO_TEST_SURELY_UNSET_KEY";
  unsetenv("CPO_TEST_SURELY_UNSET_KEY");
  OpenAiHttpTransport t;
  try {
    t.send(ep, {{"user", "x"}}, std::nullopt);
    FAIL("expected an error");
  } catch (const TransportError& e) {
    CHECK(e.kind() == TransportErrorKind::auth);
  }
}

TEST_CASE("http transport maps connection failure to a retryable kind") {
  auto ep = rollout_defaults("http://127.0.0.1:1/v1", "m");
  ep.timeout = std::chrono::milliseconds(500);
  OpenAiHttpTransport t;
  try {
    t.send(ep, {{"user", "x"}}, std::nullopt);
    FAIL("expected an error");
  } catch (const TransportError& e) {
    CHECK(is_retryable(e.kind()));
  }
}

TEST_CASE("ask_until_parsed feeds back the parse error") {
  Gateway gw;
  std::vector<Messages> seen;
  gw.register_transport("j", std::make_shared<CallbackTransport>(
                                 [&](const ChatEndpointConfig&, const Messages& m, std::optional<std::uint64_t>) {
                                   seen.push_back(m);
                                   return seen.size() == 1 ? std::string("garbage")
                                                           : std::string(R"({"1": {"rank": 1, "score": 0.5}})");
                                 }));
  const auto parsed = ask_until_parsed(gw, test::mock_endpoint("j"), {{"user", "rate"}}, 3, std::nullopt,
                                       [](const std::string& s) { return reward::parse_group_scores(s, 1); });
  CHECK(parsed.attempts == 2);
  REQUIRE(seen.size() == 2);
  CHECK(seen[1].size() == 3);
  CHECK(seen[1][1].role == "assistant");
  CHECK(seen[1][1].content == "garbage");
  CHECK(seen[1][2].content.find("could not be parsed") != std::string::npos);
}

TEST_CASE("ask_until_parsed gives up after max attempts") {
  Gateway gw;
  gw.register_transport("j", scripted(R"({"mode": "queue", "replies": ["x"], "cycle": true})"));
  try {
    ask_until_parsed(gw, test::mock_endpoint("j"), {{"user", "rate"}}, 3, std::nullopt,
                     [](const std::string& s) { return reward::parse_group_scores(s, 1); });
    FAIL("expected an error");
  } catch (const JudgeOutputError& e) {
    CHECK(e.attempts() == 3);
    CHECK(e.last_reply() == "x");
  }
}

TEST_CASE("concurrency cap is respected") {
  Gateway gw;
  std::atomic<int> in_flight{0}, peak{0};
  gw.register_transport("c", std::make_shared<CallbackTransport>(
                                 [&](const ChatEndpointConfig&, const Messages&, std::optional<std::uint64_t>) {
                                   const int now = ++in_flight;
                                   int p = peak.load();
                                   while (now > p && !peak.compare_exchange_weak(p, now)) {
                                   }
                                   std::this_thread::sleep_for(std::chrono::milliseconds(5));
                                   --in_flight;
                                   return std::string("ok");
                                 }));
  auto ep = test::mock_endpoint("c");
  ep.max_concurrency = 2;
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&] { gw.chat(ep, {}); });
  for (auto& t : threads) t.join();
  CHECK(peak.load() <= 2);
}
