#include "cpo/service/server.hpp"

#include <httplib.h>

#include "cpo/analytics/stats.hpp"
#include "cpo/arena/engine.hpp"
#include "cpo/core/json.hpp"
#include "cpo/core/random.hpp"
#include "cpo/reward/pipeline.hpp"

namespace cpo::service {

namespace {

HttpResponse json_response(int status, const json& body) { return {status, canonical_dump(body)}; }

HttpResponse error_response(int status, const std::string& message, json extra = json::object()) {
  extra["schema_version"] = kSchemaVersion;
  extra["status"] = status;
  extra["error"] = message;
  return json_response(status, extra);
}

}  // namespace

ServiceConfig service_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  ServiceConfig c;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() ? base_dir / path : path;
  };
  c.host = j.value("host", c.host);
  c.port = j.value("port", c.port);
  if (j.contains("judge")) c.judge = j["judge"].get<gateway::ChatEndpointConfig>();
  if (j.contains("length")) c.scoring.length = j["length"].get<reward::LengthPenaltyConfig>();
  if (j.contains("objective")) c.objective = j["objective"].get<policy::ObjectiveConfig>();
  c.scoring.max_attempts = j.value("judge_attempts", c.scoring.max_attempts);
  c.scoring.shuffle_candidates = j.value("shuffle_candidates", false);
  c.scoring.shuffle_seed = j.value("shuffle_seed", std::uint64_t{0});
  c.max_group_size = j.value("max_group_size", c.max_group_size);
  c.score_requests_per_second = j.value("score_requests_per_second", c.score_requests_per_second);
  c.score_burst = j.value("score_burst", c.score_burst);
  c.store_path = resolve(j.value("store_path", c.store_path.string()));
  c.annotators_per_pair = j.value("annotators_per_pair", c.annotators_per_pair);
  if (j.contains("run_dir")) c.run_dir = resolve(j["run_dir"].get<std::string>());
  if (j.contains("bearer_token")) throw SchemaError("bearer_token must come from the environment (bearer_token_env)");
  if (j.contains("bearer_token_env")) {
    const char* v = std::getenv(j["bearer_token_env"].get<std::string>().c_str());
    if (v) c.bearer_token = v;
  }
  c.worker_threads = j.value("worker_threads", c.worker_threads);
  return c;
}

Service::Service(ServiceConfig config, gateway::Gateway& gateway, gateway::PromptLibrary prompts)
    : config_(std::move(config)),
      gateway_(gateway),
      prompts_(std::move(prompts)),
      store_(std::make_unique<AnnotationStore>(config_.store_path, config_.annotators_per_pair)),
      tokens_(config_.score_burst),
      last_refill_(std::chrono::steady_clock::now()) {
  if (config_.max_group_size < 2) throw ValidationError("max_group_size must be >= 2");
  if (config_.run_dir) import_run(*config_.run_dir);
}

Service::~Service() { stop(); }

void Service::import_run(const std::filesystem::path& run_dir) {
  const auto plan = parse_as<arena::TournamentPlan>(read_json_file(run_dir / "plan.json"), "plan.json");
  const auto results = arena::load_run_results(run_dir);
  std::map<std::string, ChatCircumstance> circumstances;
  for (auto& c : read_jsonl_as<ChatCircumstance>(run_dir / "circumstances.jsonl")) circumstances.emplace(c.id, c);
  for (const auto& r : results) {
    const auto it = circumstances.find(r.entry.circumstance_id);
    if (it == circumstances.end()) throw SchemaError("run references unknown circumstance " + r.entry.circumstance_id);
    store_->import_pair(r, it->second, derive_seed(plan.master_seed, {fnv1a64("annotation"), fnv1a64(r.entry.pair_id)}));
  }
  if (!results.empty()) {
    winrate_doc_ = arena::matrix_document(
        analytics::build_win_rate_matrix(std::span<const arena::MatchupResult>(results), plan.model_ids()));
  }
}

bool Service::take_token() {
  if (config_.score_requests_per_second <= 0.0) return true;
  std::lock_guard lock(bucket_mu_);
  const auto now = std::chrono::steady_clock::now();
  tokens_ = std::min(config_.score_burst,
                     tokens_ + std::chrono::duration<double>(now - last_refill_).count() * config_.score_requests_per_second);
  last_refill_ = now;
  if (tokens_ < 1.0) return false;
  tokens_ -= 1.0;
  return true;
}

bool Service::authorized(const std::string& header) const {
  if (config_.bearer_token.empty()) return true;
  return header == "Bearer " + config_.bearer_token;
}

HttpResponse Service::health() const { return json_response(200, {{"status", "ok"}}); }

HttpResponse Service::score(const std::string& body) {
  if (!config_.judge) return error_response(503, "no judge endpoint configured");
  if (!take_token()) return error_response(429, "score rate limit exceeded");
  reward::ScoreRequest req;
  try {
    req = reward::parse_score_request(json::parse(body));
  } catch (const json::exception& e) {
    return error_response(400, std::string("malformed request: ") + e.what());
  } catch (const Error& e) {
    return error_response(400, std::string("malformed request: ") + e.what());
  }
  const std::size_t g = req.group.size();
  if (g < 2 || g > config_.max_group_size) {
    return error_response(422, "group size " + std::to_string(g) + " outside [2, " +
                                   std::to_string(config_.max_group_size) + "]");
  }
  reward::ScoringOptions opts = config_.scoring;
  if (req.length_config) opts.length = *req.length_config;
  try {
    const auto out = reward::run_score_pipeline(gateway_, prompts_, req.group, *config_.judge, opts, config_.objective);
    return json_response(200, reward::to_json(out, req.group.id));
  } catch (const gateway::RetriesExhaustedError& e) {
    const int status = e.kind() == gateway::TransportErrorKind::rate_limited ? 429 : 502;
    return error_response(status, e.what(),
                          {{"kind", to_string(e.kind())}, {"attempts", e.attempts()}, {"retry_trace", e.trace()}});
  } catch (const gateway::TransportError& e) {
    return error_response(502, e.what(), {{"kind", to_string(e.kind())}, {"retry_trace", json::array({e.what()})}});
  } catch (const JudgeOutputError& e) {
    return error_response(502, e.what(), {{"attempts", e.attempts()}, {"last_reply", e.last_reply()}});
  } catch (const ValidationError& e) {
    return error_response(400, e.what());
  }
}

HttpResponse Service::next_annotation(const std::string& annotator_id) {
  if (annotator_id.empty()) return error_response(400, "annotator_id is required");
  const auto task = store_->next_task(annotator_id);
  if (!task) return {204, "", "application/json"};
  return json_response(200, client_view(*task, store_->done_count(annotator_id), store_->pair_count()));
}

HttpResponse Service::submit_annotation(const std::string& pair_id, const std::string& body) {
  std::string annotator_id, label;
  try {
    const json j = json::parse(body);
    annotator_id = j.at("annotator_id").get<std::string>();
    label = j.at("label").get<std::string>();
  } catch (const json::exception& e) {
    return error_response(400, std::string("malformed request: ") + e.what());
  }
  if (annotator_id.empty()) return error_response(400, "annotator_id is required");
  SubmitResult r;
  try {
    r = store_->submit(pair_id, annotator_id, label, utc_now_iso8601());
  } catch (const ValidationError& e) {
    return error_response(400, e.what());
  }
  switch (r.status) {
    case SubmitStatus::unknown_pair: return error_response(404, "unknown pair " + pair_id);
    case SubmitStatus::duplicate: return error_response(409, "annotation already submitted");
    case SubmitStatus::not_assigned: return error_response(409, "pair is not assigned to this annotator");
    case SubmitStatus::stored: break;
  }
  {
    std::lock_guard lock(cache_mu_);
    ++annotations_version_;
  }
  // The stored label is in true A/B terms and would reveal the mapping.
  return json_response(201, {{"schema_version", kSchemaVersion},
                             {"pair_id", r.record->pair_id},
                             {"annotator_id", r.record->annotator_id},
                             {"submitted_at", r.record->submitted_at},
                             {"status", "stored"}});
}

HttpResponse Service::winrate() {
  if (!winrate_doc_) return error_response(404, "no tournament results loaded");
  return json_response(200, *winrate_doc_);
}

HttpResponse Service::agreement() {
  std::lock_guard lock(cache_mu_);
  if (agreement_cache_ && agreement_cached_version_ == annotations_version_) return *agreement_cache_;
  const auto records = store_->annotations();
  HttpResponse resp;
  if (records.empty()) {
    resp = error_response(404, "no annotations yet");
  } else {
    const auto judge = store_->judge_labels();
    resp = json_response(200, analytics::to_json(analytics::summarize_agreement(records, &judge)));
  }
  agreement_cache_ = resp;
  agreement_cached_version_ = annotations_version_;
  return resp;
}

void Service::install_routes() {
  auto& s = *server_;
  const int threads = std::max(1, config_.worker_threads);
  s.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
  auto send = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    if (!r.body.empty()) res.set_content(r.body, r.content_type);
  };
  s.set_pre_routing_handler([this, send](const httplib::Request& req, httplib::Response& res) {
    if (req.path.rfind("/v1/", 0) == 0 && !authorized(req.get_header_value("Authorization"))) {
      send(res, error_response(401, "missing or invalid bearer token"));
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });
  s.Get("/healthz", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
  s.Post("/v1/score", [this, send](const httplib::Request& req, httplib::Response& res) { send(res, score(req.body)); });
  s.Get("/v1/annotations/next", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, next_annotation(req.get_param_value("annotator_id")));
  });
  s.Post(R"(/v1/annotations/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, submit_annotation(req.matches[1].str(), req.body));
  });
  s.Get("/v1/results/winrate", [this, send](const httplib::Request&, httplib::Response& res) { send(res, winrate()); });
  s.Get("/v1/results/agreement",
        [this, send](const httplib::Request&, httplib::Response& res) { send(res, agreement()); });
  s.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string msg = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    send(res, error_response(500, msg));
  });
}

int Service::start() {
  if (server_) throw Error("service already started");
  server_ = std::make_unique<httplib::Server>();
  install_routes();
  int port = config_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(config_.host);
    if (port < 0) throw IoError("cannot bind " + config_.host);
  } else if (!server_->bind_to_port(config_.host, port)) {
    throw IoError("cannot bind " + config_.host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void Service::run() {
  start();
  if (thread_.joinable()) thread_.join();
}

void Service::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace cpo::service
