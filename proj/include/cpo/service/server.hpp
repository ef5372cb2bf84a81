#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <json.hpp>

#include "cpo/gateway/chat.hpp"
#include "cpo/gateway/template.hpp"
#include "cpo/policy/objective.hpp"
#include "cpo/reward/scoring.hpp"
#include "cpo/service/annotation_store.hpp"

namespace httplib {
class Server;
}

namespace cpo::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<gateway::ChatEndpointConfig> judge;
  reward::ScoringOptions scoring;
  policy::ObjectiveConfig objective;
  std::size_t max_group_size = 16;
  double score_requests_per_second = 0.0;  // 0 = unlimited
  double score_burst = 1.0;
  std::filesystem::path store_path = "annotations.sqlite";
  int annotators_per_pair = 3;
  std::optional<std::filesystem::path> run_dir;  // imported for annotation and win-rate views
  std::string bearer_token;                      // empty disables the check
  int worker_threads = 8;
};

// Reads a JSON or TOML config; endpoint secrets come from the environment
// variables named in the endpoint configs.
ServiceConfig service_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON, empty for 204
  std::string content_type = "application/json";
};

// Request handling, usable without a socket. Everything the HTTP layer does
// beyond routing and auth lives here.
class Service {
 public:
  Service(ServiceConfig config, gateway::Gateway& gateway, gateway::PromptLibrary prompts);
  ~Service();

  HttpResponse score(const std::string& body);
  HttpResponse next_annotation(const std::string& annotator_id);
  HttpResponse submit_annotation(const std::string& pair_id, const std::string& body);
  HttpResponse winrate();
  HttpResponse agreement();
  HttpResponse health() const;

  bool authorized(const std::string& authorization_header) const;

  AnnotationStore& store() { return *store_; }
  const ServiceConfig& config() const { return config_; }

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Serves on the calling thread until stop().
  void run();
  void stop();

 private:
  bool take_token();
  void import_run(const std::filesystem::path& run_dir);
  void install_routes();

  ServiceConfig config_;
  gateway::Gateway& gateway_;
  gateway::PromptLibrary prompts_;
  std::unique_ptr<AnnotationStore> store_;

  std::optional<nlohmann::json> winrate_doc_;
  std::mutex cache_mu_;
  std::uint64_t annotations_version_ = 0;
  std::uint64_t agreement_cached_version_ = ~std::uint64_t{0};
  std::optional<HttpResponse> agreement_cache_;

  std::mutex bucket_mu_;
  double tokens_ = 0.0;
  std::chrono::steady_clock::time_point last_refill_;

  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace cpo::service
