#include "cpo/gateway/chat.hpp"

#include <algorithm>
#include <condition_variable>
#include <thread>

#include "cpo/core/json.hpp"
#include "cpo/core/random.hpp"
#include "cpo/gateway/transports.hpp"

namespace cpo::gateway {

void ChatEndpointConfig::validate() const {
  if (base_url.empty()) throw ValidationError("endpoint base_url is empty");
  if (temperature < 0.0) throw ValidationError("endpoint temperature must be >= 0");
  if (max_retries < 0) throw ValidationError("endpoint max_retries must be >= 0");
  if (max_concurrency < 1) throw ValidationError("endpoint max_concurrency must be >= 1");
  if (requests_per_second < 0.0) throw ValidationError("endpoint requests_per_second must be >= 0");
}

void to_json(nlohmann::json& j, const ChatEndpointConfig& c) {
  j = nlohmann::json{{"base_url", c.base_url},
                     {"model_name", c.model_name},
                     {"api_key_env", c.api_key_env},
                     {"temperature", c.temperature},
                     {"top_p", c.top_p},
                     {"max_tokens", c.max_tokens},
                     {"timeout_ms", c.timeout.count()},
                     {"max_retries", c.max_retries},
                     {"backoff_ms", c.backoff_base.count()},
                     {"max_concurrency", c.max_concurrency},
                     {"requests_per_second", c.requests_per_second}};
}

void from_json(const nlohmann::json& j, ChatEndpointConfig& c) {
  c = ChatEndpointConfig{};
  c.base_url = j.at("base_url").get<std::string>();
  c.model_name = j.value("model_name", std::string{});
  c.api_key_env = j.value("api_key_env", std::string{});
  c.temperature = j.value("temperature", c.temperature);
  c.top_p = j.value("top_p", c.top_p);
  c.max_tokens = j.value("max_tokens", c.max_tokens);
  c.timeout = std::chrono::milliseconds(j.value("timeout_ms", c.timeout.count()));
  c.max_retries = j.value("max_retries", c.max_retries);
  c.backoff_base = std::chrono::milliseconds(j.value("backoff_ms", c.backoff_base.count()));
  c.max_concurrency = j.value("max_concurrency", c.max_concurrency);
  c.requests_per_second = j.value("requests_per_second", c.requests_per_second);
  if (j.contains("api_key")) throw SchemaError("endpoint configs must not contain api_key; use api_key_env");
  c.validate();
}

ChatEndpointConfig rollout_defaults(std::string base_url, std::string model_name) {
  ChatEndpointConfig c;
  c.base_url = std::move(base_url);
  c.model_name = std::move(model_name);
  c.temperature = 1.0;
  c.top_p = 1.0;
  return c;
}

ChatEndpointConfig judge_defaults(std::string base_url, std::string model_name) {
  ChatEndpointConfig c = rollout_defaults(std::move(base_url), std::move(model_name));
  c.temperature = 0.0;
  c.max_tokens = 2048;
  return c;
}

std::string_view to_string(TransportErrorKind kind) {
  switch (kind) {
    case TransportErrorKind::network: return "network";
    case TransportErrorKind::timeout: return "timeout";
    case TransportErrorKind::auth: return "auth";
    case TransportErrorKind::rate_limited: return "rate_limited";
    case TransportErrorKind::server: return "server";
    case TransportErrorKind::client: return "client";
    case TransportErrorKind::protocol: return "protocol";
    case TransportErrorKind::exhausted_script: return "exhausted_script";
  }
  return "unknown";
}

bool is_retryable(TransportErrorKind kind) {
  switch (kind) {
    case TransportErrorKind::network:
    case TransportErrorKind::timeout:
    case TransportErrorKind::rate_limited:
    case TransportErrorKind::server:
    case TransportErrorKind::protocol:
      return true;
    default:
      return false;
  }
}

ChatReply CallbackTransport::send(const ChatEndpointConfig& endpoint, const Messages& messages,
                                  std::optional<std::uint64_t> seed) {
  ChatReply r;
  r.text = fn_(endpoint, messages, seed);
  return r;
}

std::string request_fingerprint(const std::string& model_name, const Messages& messages) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : messages) arr.push_back({{"role", m.role}, {"content", m.content}});
  return sha256_hex(model_name + "\n" + canonical_dump(arr));
}

// Per-endpoint in-flight cap plus a token bucket.
class EndpointLimiter {
 public:
  EndpointLimiter(int max_concurrency, double rps) : slots_(max_concurrency), rps_(rps) {}

  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return slots_ > 0; });
    --slots_;
    if (rps_ > 0.0) {
      const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(1.0 / rps_));
      const auto now = std::chrono::steady_clock::now();
      const auto at = std::max(now, next_allowed_);
      next_allowed_ = at + interval;
      if (at > now) {
        lock.unlock();
        std::this_thread::sleep_until(at);
      }
    }
  }

  void release() {
    {
      std::lock_guard lock(mu_);
      ++slots_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int slots_;
  double rps_;
  std::chrono::steady_clock::time_point next_allowed_{};
};

Gateway::Gateway(std::filesystem::path base_dir)
    : base_dir_(std::move(base_dir)),
      sleep_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

Gateway::~Gateway() = default;

void Gateway::register_transport(const std::string& name, std::shared_ptr<ChatTransport> transport) {
  std::lock_guard lock(mu_);
  transports_["mock://" + name] = std::move(transport);
}

std::shared_ptr<ChatTransport> Gateway::transport_for(const ChatEndpointConfig& endpoint) {
  std::lock_guard lock(mu_);
  const std::string& url = endpoint.base_url;
  if (auto it = transports_.find(url); it != transports_.end()) return it->second;
  std::shared_ptr<ChatTransport> t;
  if (url.rfind("mock://", 0) == 0) {
    throw ValidationError("no transport registered for " + url);
  } else if (url.rfind("scripted:", 0) == 0) {
    std::filesystem::path p = url.substr(9);
    if (p.is_relative() && !base_dir_.empty()) p = base_dir_ / p;
    t = ScriptedTransport::from_file(p);
  } else if (url.rfind("http://", 0) == 0 || url.rfind("https://", 0) == 0) {
    t = std::make_shared<OpenAiHttpTransport>();
  } else {
    throw ValidationError("unsupported endpoint base_url '" + url + "'");
  }
  transports_[url] = t;
  return t;
}

EndpointLimiter& Gateway::limiter_for(const ChatEndpointConfig& endpoint) {
  std::lock_guard lock(mu_);
  auto& slot = limiters_[endpoint.base_url];
  if (!slot) slot = std::make_unique<EndpointLimiter>(endpoint.max_concurrency, endpoint.requests_per_second);
  return *slot;
}

ChatReply Gateway::chat(const ChatEndpointConfig& endpoint, const Messages& messages,
                        std::optional<std::uint64_t> seed) {
  endpoint.validate();
  auto transport = transport_for(endpoint);
  EndpointLimiter& limiter = limiter_for(endpoint);

  std::vector<std::string> trace;
  for (int attempt = 0;; ++attempt) {
    const auto start = std::chrono::steady_clock::now();
    limiter.acquire();
    try {
      ChatReply reply = transport->send(endpoint, messages, seed);
      limiter.release();
      reply.retries = attempt;
      reply.latency_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      return reply;
    } catch (const TransportError& e) {
      limiter.release();
      trace.push_back("attempt " + std::to_string(attempt + 1) + ": " +
                      std::string(to_string(e.kind())) + ": " + e.what());
      if (!is_retryable(e.kind())) throw;
      if (attempt >= endpoint.max_retries) {
        throw RetriesExhaustedError(e.kind(),
                                    "retries exhausted after " + std::to_string(attempt + 1) +
                                        " attempts against " + endpoint.base_url + ": " + e.what(),
                                    attempt + 1, std::move(trace));
      }
    } catch (...) {
      limiter.release();
      throw;
    }
    const auto backoff = endpoint.backoff_base * (1LL << std::min(attempt, 10));
    if (backoff.count() > 0) sleep_(backoff);
  }
}

}  // namespace cpo::gateway
