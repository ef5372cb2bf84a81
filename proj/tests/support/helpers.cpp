#include "helpers.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <json.hpp>

namespace cpo::test {

TempDir::TempDir(const std::string& tag) {
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() / (tag + "-" + std::to_string(rd()) + std::to_string(rd()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

ChatCircumstance make_circumstance(const std::string& id, const std::string& name) {
  ChatCircumstance c;
  c.id = id;
  c.profile = {"p-" + id, name, name + " keeps a lighthouse and distrusts strangers.", "drama"};
  c.scenario_text = "A storm strands a traveler at the lighthouse.";
  c.opening_line = "(opens the door) You'd best come in.";
  return c;
}

QueryContext make_context(const std::string& name) {
  QueryContext q;
  q.profile = make_circumstance("c1", name).profile;
  q.scenario_text = "A storm strands a traveler at the lighthouse.";
  q.history = {{Role::bot, "(opens the door) You'd best come in.", 0}, {Role::user, "Thank you. Can I stay?", 1}};
  q.criterion_id = "attractiveness";
  return q;
}

ResponseGroup make_group(const std::vector<std::string>& texts, const std::vector<std::size_t>& lengths) {
  ResponseGroup g;
  g.id = "g";
  g.context = make_context();
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Candidate c;
    c.index = i + 1;
    c.text = texts[i];
    if (i < lengths.size()) c.length_tokens = lengths[i];
    g.candidates.push_back(c);
  }
  return g;
}

gateway::ChatEndpointConfig mock_endpoint(const std::string& name, const std::string& model) {
  auto cfg = gateway::judge_defaults("mock://" + name, model);
  cfg.backoff_base = std::chrono::milliseconds(0);
  return cfg;
}

std::string group_reply(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::size_t i = order[r];
    j[std::to_string(i + 1)] = {{"analysis", "sample " + std::to_string(i + 1)},
                                {"rank", r + 1},
                                {"score", scores[i]}};
  }
  return j.dump();
}

Trajectory make_trajectory(const std::string& model, const std::vector<std::string>& bot_lines,
                           const std::string& circumstance_id) {
  Trajectory t;
  t.circumstance_id = circumstance_id;
  t.model_id = model;
  std::size_t idx = 0;
  t.turns.push_back({Role::bot, "(opens the door) You'd best come in.", idx++});
  for (const auto& line : bot_lines) {
    t.turns.push_back({Role::user, "Tell me more.", idx++});
    t.turns.push_back({Role::bot, line, idx++});
  }
  return t;
}

}  // namespace cpo::test
