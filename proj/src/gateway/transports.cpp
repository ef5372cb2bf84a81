#include "cpo/gateway/transports.hpp"

#include <cstdlib>
#include <fstream>

#include <httplib.h>

#include "cpo/core/json.hpp"
#include "cpo/gateway/template.hpp"

namespace cpo::gateway {

namespace {

TransportErrorKind kind_from_string(const std::string& s) {
  for (auto k : {TransportErrorKind::network, TransportErrorKind::timeout, TransportErrorKind::auth,
                 TransportErrorKind::rate_limited, TransportErrorKind::server, TransportErrorKind::client,
                 TransportErrorKind::protocol, TransportErrorKind::exhausted_script}) {
    if (to_string(k) == s) return k;
  }
  throw SchemaError("unknown fail_kind '" + s + "'");
}

std::size_t section_length(const std::string& prompt, const std::string& tag) {
  const std::string open = "<" + tag + ">";
  const std::string close = "</" + tag + ">";
  // The last opening tag is the rendered one; earlier mentions belong to
  // instructions.
  const auto b = prompt.rfind(open);
  if (b == std::string::npos) return 0;
  const auto e = prompt.find(close, b);
  if (e == std::string::npos) return 0;
  return e - (b + open.size());
}

}  // namespace

ScriptedTransport::ScriptedTransport(const nlohmann::json& spec) {
  const std::string mode = spec.value("mode", std::string{"queue"});
  if (mode == "queue") {
    mode_ = Mode::queue;
    original_queue_ = spec.at("replies").get<std::vector<std::string>>();
    queue_.assign(original_queue_.begin(), original_queue_.end());
    cycle_ = spec.value("cycle", false);
  } else if (mode == "fingerprint") {
    mode_ = Mode::fingerprint;
    by_fingerprint_ = spec.at("replies").get<std::map<std::string, std::string>>();
  } else if (mode == "pattern") {
    mode_ = Mode::pattern;
    pattern_ = spec.at("reply").get<std::string>();
  } else if (mode == "length_judge") {
    mode_ = Mode::length_judge;
    tie_margin_ = spec.value("tie_margin", std::size_t{0});
  } else {
    throw SchemaError("unknown scripted transport mode '" + mode + "'");
  }
  if (spec.contains("fallback")) fallback_ = spec.at("fallback").get<std::string>();
  fail_first_ = spec.value("fail_first", 0);
  if (spec.contains("fail_kind")) fail_kind_ = kind_from_string(spec.at("fail_kind").get<std::string>());
}

std::shared_ptr<ScriptedTransport> ScriptedTransport::from_file(const std::filesystem::path& path) {
  try {
    return std::make_shared<ScriptedTransport>(read_json_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::string length_judge_rank(const std::string& prompt, std::size_t tie_margin) {
  const std::size_t a = section_length(prompt, "Dialogue A");
  const std::size_t b = section_length(prompt, "Dialogue B");
  if (a > b + tie_margin) return "A";
  if (b > a + tie_margin) return "B";
  return "Tie";
}

std::string ScriptedTransport::reply_for(const ChatEndpointConfig& endpoint, const Messages& messages,
                                         std::optional<std::uint64_t> seed) {
  switch (mode_) {
    case Mode::queue: {
      std::lock_guard lock(mu_);
      if (queue_.empty() && cycle_) queue_.assign(original_queue_.begin(), original_queue_.end());
      if (queue_.empty()) {
        if (fallback_) return *fallback_;
        throw TransportError(TransportErrorKind::exhausted_script, "scripted reply queue exhausted");
      }
      std::string r = std::move(queue_.front());
      queue_.pop_front();
      return r;
    }
    case Mode::fingerprint: {
      const std::string fp = request_fingerprint(endpoint.model_name, messages);
      if (auto it = by_fingerprint_.find(fp); it != by_fingerprint_.end()) return it->second;
      if (fallback_) return *fallback_;
      throw TransportError(TransportErrorKind::exhausted_script, "no scripted reply for fingerprint " + fp);
    }
    case Mode::pattern: {
      std::size_t turn = 0;
      for (const auto& m : messages) turn += m.role == "user";
      const Bindings b{{"turn", std::to_string(turn)},
                       {"seed", seed ? std::to_string(*seed) : std::string{"none"}},
                       {"model", endpoint.model_name}};
      return render(PromptTemplate::from_body("pattern", pattern_), b);
    }
    case Mode::length_judge: {
      std::string prompt;
      for (const auto& m : messages) prompt += m.content + "\n";
      const std::string rank = length_judge_rank(prompt, tie_margin_);
      nlohmann::json j{{"analysis A", "length " + std::to_string(section_length(prompt, "Dialogue A"))},
                       {"analysis B", "length " + std::to_string(section_length(prompt, "Dialogue B"))},
                       {"comparison AB", "longer dialogue preferred"},
                       {"rank", rank}};
      return j.dump();
    }
  }
  throw Error("unreachable scripted mode");
}

ChatReply ScriptedTransport::send(const ChatEndpointConfig& endpoint, const Messages& messages,
                                  std::optional<std::uint64_t> seed) {
  const std::size_t n = calls_.fetch_add(1);
  if (n < static_cast<std::size_t>(fail_first_)) {
    throw TransportError(fail_kind_, "scripted failure " + std::to_string(n + 1));
  }
  ChatReply r;
  r.text = reply_for(endpoint, messages, seed);
  return r;
}

nlohmann::json chat_request_body(const ChatEndpointConfig& endpoint, const Messages& messages,
                                 std::optional<std::uint64_t> seed) {
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  nlohmann::json body{{"model", endpoint.model_name},
                      {"messages", std::move(msgs)},
                      {"temperature", endpoint.temperature},
                      {"top_p", endpoint.top_p},
                      {"max_tokens", endpoint.max_tokens}};
  // Many servers reject 64-bit seeds; fold into the signed 31-bit range.
  if (seed) body["seed"] = static_cast<std::int64_t>(*seed & 0x7fffffffULL);
  return body;
}

ChatReply parse_chat_response(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(TransportErrorKind::protocol, std::string("response is not JSON: ") + e.what());
  }
  ChatReply r;
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw TransportError(TransportErrorKind::protocol, "message content is not a string");
    r.text = content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(TransportErrorKind::protocol, std::string("malformed completion response: ") + e.what());
  }
  if (j.contains("usage") && j["usage"].is_object()) {
    const auto& u = j["usage"];
    if (u.contains("completion_tokens") && u["completion_tokens"].is_number_unsigned()) {
      r.usage.reported = true;
      r.usage.completion_tokens = u["completion_tokens"].get<std::size_t>();
      r.usage.prompt_tokens = u.value("prompt_tokens", std::size_t{0});
    }
  }
  return r;
}

ChatReply OpenAiHttpTransport::send(const ChatEndpointConfig& endpoint, const Messages& messages,
                                    std::optional<std::uint64_t> seed) {
  // Split base_url into scheme://host[:port] and path prefix.
  const auto scheme_end = endpoint.base_url.find("://");
  const auto path_start = endpoint.base_url.find('/', scheme_end + 3);
  const std::string origin = endpoint.base_url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : endpoint.base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  httplib::Client cli(origin);
  const auto secs = endpoint.timeout.count() / 1000;
  const auto usecs = (endpoint.timeout.count() % 1000) * 1000;
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);

  httplib::Headers headers;
  if (!endpoint.api_key_env.empty()) {
    const char* key = std::getenv(endpoint.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw TransportError(TransportErrorKind::auth, "environment variable " + endpoint.api_key_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const auto res = cli.Post(prefix + "/chat/completions", headers,
                            chat_request_body(endpoint, messages, seed).dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const auto kind = (err == httplib::Error::Read || err == httplib::Error::Write ||
                       err == httplib::Error::ConnectionTimeout)
                          ? TransportErrorKind::timeout
                          : TransportErrorKind::network;
    throw TransportError(kind, "request to " + endpoint.base_url + " failed: " + httplib::to_string(err));
  }
  const int status = res->status;
  if (status == 401 || status == 403) throw TransportError(TransportErrorKind::auth, "HTTP " + std::to_string(status), status);
  if (status == 429) throw TransportError(TransportErrorKind::rate_limited, "HTTP 429", status);
  if (status >= 500) throw TransportError(TransportErrorKind::server, "HTTP " + std::to_string(status), status);
  if (status >= 400) {
    throw TransportError(TransportErrorKind::client, "HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200),
                         status);
  }
  return parse_chat_response(res->body);
}

}  // namespace cpo::gateway
