#pragma once

// Chat-completion gateway shared by bots under test, the user simulator and
// every judge. One code path, different endpoint configs.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpo/core/error.hpp"

namespace cpo::gateway {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

using Messages = std::vector<ChatMessage>;

struct ChatEndpointConfig {
  // http(s)://host[:port][/prefix] for OpenAI-compatible servers,
  // scripted:<file.json> for file-defined mocks, mock://<name> for
  // transports registered in-process.
  std::string base_url;
  std::string model_name;
  std::string api_key_env;  // name of the env var holding the key; never the key
  double temperature = 1.0;
  double top_p = 1.0;
  int max_tokens = 512;
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{500};
  int max_concurrency = 8;
  double requests_per_second = 0.0;  // 0 = unlimited

  void validate() const;
  bool operator==(const ChatEndpointConfig&) const = default;
};

void to_json(nlohmann::json& j, const ChatEndpointConfig& c);
void from_json(const nlohmann::json& j, ChatEndpointConfig& c);

// Rollout sampling (temperature 1.0, top-p 1.0) and judge decoding
// (temperature 0.0) defaults.
ChatEndpointConfig rollout_defaults(std::string base_url, std::string model_name);
ChatEndpointConfig judge_defaults(std::string base_url, std::string model_name);

struct ChatUsage {
  bool reported = false;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
};

struct ChatReply {
  std::string text;
  ChatUsage usage;
  int retries = 0;
  double latency_ms = 0.0;
};

enum class TransportErrorKind { network, timeout, auth, rate_limited, server, client, protocol, exhausted_script };

std::string_view to_string(TransportErrorKind kind);
bool is_retryable(TransportErrorKind kind);

class TransportError : public Error {
 public:
  TransportError(TransportErrorKind kind, const std::string& what, int http_status = 0)
      : Error(what), kind_(kind), http_status_(http_status) {}
  TransportErrorKind kind() const { return kind_; }
  int http_status() const { return http_status_; }

 private:
  TransportErrorKind kind_;
  int http_status_;
};

class RetriesExhaustedError : public TransportError {
 public:
  RetriesExhaustedError(TransportErrorKind last_kind, const std::string& what, int attempts,
                        std::vector<std::string> trace)
      : TransportError(last_kind, what), attempts_(attempts), trace_(std::move(trace)) {}
  int attempts() const { return attempts_; }
  const std::vector<std::string>& trace() const { return trace_; }

 private:
  int attempts_;
  std::vector<std::string> trace_;
};

// One request/response exchange. Implementations throw TransportError.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual ChatReply send(const ChatEndpointConfig& endpoint, const Messages& messages,
                         std::optional<std::uint64_t> seed) = 0;
};

// Adapts a callable; the workhorse for in-process test doubles.
class CallbackTransport : public ChatTransport {
 public:
  using Fn = std::function<std::string(const ChatEndpointConfig&, const Messages&,
                                       std::optional<std::uint64_t>)>;
  explicit CallbackTransport(Fn fn) : fn_(std::move(fn)) {}
  ChatReply send(const ChatEndpointConfig& endpoint, const Messages& messages,
                 std::optional<std::uint64_t> seed) override;

 private:
  Fn fn_;
};

// Hash of (model_name, rendered messages); keys record/replay fixtures.
std::string request_fingerprint(const std::string& model_name, const Messages& messages);

class EndpointLimiter;

class Gateway {
 public:
  using SleepFn = std::function<void(std::chrono::milliseconds)>;

  // Relative scripted:<path> URLs resolve against base_dir.
  explicit Gateway(std::filesystem::path base_dir = {});
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  void register_transport(const std::string& name, std::shared_ptr<ChatTransport> transport);

  // Sends with bounded concurrency, optional rate limiting, and exponential
  // backoff on retryable failures. Auth and client errors are thrown at once;
  // retryable ones become RetriesExhaustedError after max_retries retries.
  ChatReply chat(const ChatEndpointConfig& endpoint, const Messages& messages,
                 std::optional<std::uint64_t> seed = std::nullopt);

  void set_sleep(SleepFn fn) { sleep_ = std::move(fn); }

 private:
  std::shared_ptr<ChatTransport> transport_for(const ChatEndpointConfig& endpoint);
  EndpointLimiter& limiter_for(const ChatEndpointConfig& endpoint);

  std::filesystem::path base_dir_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<ChatTransport>> transports_;
  std::map<std::string, std::unique_ptr<EndpointLimiter>> limiters_;
  SleepFn sleep_;
};

}  // namespace cpo::gateway
