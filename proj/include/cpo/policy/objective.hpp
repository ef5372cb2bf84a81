#pragma once

// Group-relative advantages and the clipped surrogate objective, computed as
// plain values. Parameter updates belong to whatever trainer embeds this.

#include <span>
#include <vector>

#include <json.hpp>

#include "cpo/core/types.hpp"

namespace cpo::policy {

struct ObjectiveConfig {
  double eps_low = 0.2;
  double eps_high = 0.28;
  double beta = 1e-3;      // KL coefficient
  double std_floor = 1e-6; // below this a group carries no comparative signal

  void validate() const;
};

struct ResponseTerms {
  double mean_clipped = 0.0;
  double mean_kl = 0.0;
  double advantage = 0.0;
};

struct ObjectiveBreakdown {
  double objective = 0.0;  // maximized
  double policy_term = 0.0;
  double kl_term = 0.0;
  std::vector<ResponseTerms> per_response;
};

// (r_i - mean) / std with the population std. Returns all zeros when
// std < std_floor. Throws std::invalid_argument on empty input.
std::vector<double> compute_advantages(std::span<const double> rewards, double std_floor = 1e-6);

// Per-token exp(logp_new - logp_old).
std::vector<double> importance_ratio(const TokenTrace& trace);

// min(ratio * A, clip(ratio, 1 - eps_low, 1 + eps_high) * A)
double clipped_term(double ratio, double advantage, const ObjectiveConfig& cfg);

// rho - log(rho) - 1 with rho = pi_ref / pi_new; nonnegative, zero iff equal.
double kl_penalty_token(double logp_new, double logp_ref);

// Advantages come from rewards.final_reward and are broadcast over each
// response's tokens. Every candidate needs a token_trace; logp_ref is
// required when beta > 0.
ObjectiveBreakdown grpo_objective(const ResponseGroup& group, const RewardVector& rewards,
                                  const ObjectiveConfig& cfg);

// d objective / d logp_new[i][t], one row per candidate. Where the ratio sits
// exactly on a clip boundary the one-sided derivative of the unclipped branch
// is returned.
std::vector<std::vector<double>> grpo_objective_gradient(const ResponseGroup& group,
                                                         const RewardVector& rewards,
                                                         const ObjectiveConfig& cfg);

void to_json(nlohmann::json& j, const ObjectiveConfig& c);
void from_json(const nlohmann::json& j, ObjectiveConfig& c);  // missing keys keep defaults
void to_json(nlohmann::json& j, const ObjectiveBreakdown& b);

}  // namespace cpo::policy
