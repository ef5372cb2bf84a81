#include "cpo/policy/objective.hpp"

namespace cpo::policy {

void to_json(nlohmann::json& j, const ObjectiveConfig& c) {
  j = nlohmann::json{{"eps_low", c.eps_low}, {"eps_high", c.eps_high}, {"beta", c.beta}, {"std_floor", c.std_floor}};
}

void from_json(const nlohmann::json& j, ObjectiveConfig& c) {
  c = ObjectiveConfig{};
  c.eps_low = j.value("eps_low", c.eps_low);
  c.eps_high = j.value("eps_high", c.eps_high);
  c.beta = j.value("beta", c.beta);
  c.std_floor = j.value("std_floor", c.std_floor);
  c.validate();
}

void to_json(nlohmann::json& j, const ObjectiveBreakdown& b) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& r : b.per_response) {
    per.push_back({{"mean_clipped", r.mean_clipped}, {"mean_kl", r.mean_kl}, {"advantage", r.advantage}});
  }
  j = nlohmann::json{{"objective", b.objective},
                     {"policy_term", b.policy_term},
                     {"kl_term", b.kl_term},
                     {"per_response", std::move(per)}};
}

}  // namespace cpo::policy
