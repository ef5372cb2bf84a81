#pragma once

#include <atomic>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>

#include <json.hpp>

#include "cpo/gateway/chat.hpp"

namespace cpo::gateway {

// Deterministic mock endpoint defined by a JSON document:
//
//   {"mode": "queue", "replies": ["a", "b"], "cycle": false}
//       FIFO; replies depend on call order, so keep queue mocks out of
//       concurrent runs.
//   {"mode": "fingerprint", "replies": {"<sha256>": "reply"}, "fallback": "..."}
//       keyed by request_fingerprint(model_name, messages).
//   {"mode": "pattern", "reply": "(nods) line {turn}"}
//       {turn} = number of user-role messages, {seed}, {model}; a pure
//       function of the request.
//   {"mode": "length_judge", "tie_margin": 0}
//       arena judge that prefers the longer of <Dialogue A>/<Dialogue B>;
//       blind to presentation order by construction.
//
// Optional for every mode: "fail_first": n, "fail_kind": "server" makes the
// first n calls throw that transport error.
class ScriptedTransport : public ChatTransport {
 public:
  explicit ScriptedTransport(const nlohmann::json& spec);
  static std::shared_ptr<ScriptedTransport> from_file(const std::filesystem::path& path);

  ChatReply send(const ChatEndpointConfig& endpoint, const Messages& messages,
                 std::optional<std::uint64_t> seed) override;

  std::size_t calls() const { return calls_.load(); }

 private:
  std::string reply_for(const ChatEndpointConfig& endpoint, const Messages& messages,
                        std::optional<std::uint64_t> seed);

  enum class Mode { queue, fingerprint, pattern, length_judge };
  Mode mode_;
  std::mutex mu_;
  std::deque<std::string> queue_;
  std::vector<std::string> original_queue_;
  bool cycle_ = false;
  std::map<std::string, std::string> by_fingerprint_;
  std::optional<std::string> fallback_;
  std::string pattern_;
  std::size_t tie_margin_ = 0;
  int fail_first_ = 0;
  TransportErrorKind fail_kind_ = TransportErrorKind::server;
  std::atomic<std::size_t> calls_{0};
};

// The arena length judge's decision rule, exposed for tests and fixtures:
// returns "A", "B" or "Tie" for a rendered arena-judge prompt.
std::string length_judge_rank(const std::string& prompt, std::size_t tie_margin = 0);

// OpenAI-compatible POST {base_url}/chat/completions.
class OpenAiHttpTransport : public ChatTransport {
 public:
  ChatReply send(const ChatEndpointConfig& endpoint, const Messages& messages,
                 std::optional<std::uint64_t> seed) override;
};

// Request body sent by OpenAiHttpTransport; exposed for wire-format tests.
nlohmann::json chat_request_body(const ChatEndpointConfig& endpoint, const Messages& messages,
                                 std::optional<std::uint64_t> seed);

// Extracts choices[0].message.content and usage; throws TransportError(protocol).
ChatReply parse_chat_response(const std::string& body);

}  // namespace cpo::gateway
