#include "cpo/policy/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cpo/core/error.hpp"

namespace cpo::policy {

void ObjectiveConfig::validate() const {
  if (!(eps_low > 0.0 && eps_low <= 1.0)) throw ValidationError("eps_low must lie in (0, 1]");
  if (!(eps_high >= 0.0)) throw ValidationError("eps_high must be nonnegative");
  if (!(beta >= 0.0)) throw ValidationError("beta must be nonnegative");
  if (!(std_floor > 0.0)) throw ValidationError("std_floor must be positive");
}

std::vector<double> compute_advantages(std::span<const double> rewards, double std_floor) {
  if (rewards.empty()) throw std::invalid_argument("compute_advantages: empty reward list");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);

  std::vector<double> adv(rewards.size(), 0.0);
  if (sd < std_floor) return adv;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / sd;
  return adv;
}

std::vector<double> importance_ratio(const TokenTrace& trace) {
  if (trace.logp_new.size() != trace.logp_old.size())
    throw ValidationError("importance_ratio: logp_new has " +
                          std::to_string(trace.logp_new.size()) + " entries, logp_old has " +
                          std::to_string(trace.logp_old.size()));
  std::vector<double> r(trace.logp_new.size());
  for (std::size_t t = 0; t < r.size(); ++t) r[t] = std::exp(trace.logp_new[t] - trace.logp_old[t]);
  return r;
}

double clipped_term(double ratio, double advantage, const ObjectiveConfig& cfg) {
  const double clipped = std::clamp(ratio, 1.0 - cfg.eps_low, 1.0 + cfg.eps_high);
  return std::min(ratio * advantage, clipped * advantage);
}

double kl_penalty_token(double logp_new, double logp_ref) {
  // rho - log(rho) - 1 = expm1(d) - d, accurate for small d.
  const double d = logp_ref - logp_new;
  return std::expm1(d) - d;
}

namespace {

struct PreparedGroup {
  std::vector<double> advantages;
  std::vector<const TokenTrace*> traces;
};

PreparedGroup prepare(const ResponseGroup& group, const RewardVector& rewards,
                      const ObjectiveConfig& cfg) {
  cfg.validate();
  const std::size_t g = group.candidates.size();
  if (g == 0) throw ValidationError("grpo_objective: empty group");
  if (rewards.final_reward.size() != g)
    throw ValidationError("grpo_objective: " + std::to_string(rewards.final_reward.size()) +
                          " rewards for " + std::to_string(g) + " candidates");
  PreparedGroup p;
  p.advantages = compute_advantages(rewards.final_reward, cfg.std_floor);
  for (const auto& c : group.candidates) {
    if (!c.token_trace)
      throw ValidationError("grpo_objective: candidate " + std::to_string(c.index) +
                            " has no token trace");
    const TokenTrace& tr = *c.token_trace;
    if (tr.logp_new.empty())
      throw ValidationError("grpo_objective: candidate " + std::to_string(c.index) +
                            " has an empty token trace");
    if (tr.logp_new.size() != tr.logp_old.size())
      throw ValidationError("grpo_objective: candidate " + std::to_string(c.index) +
                            " has mismatched logp_new/logp_old lengths");
    if (cfg.beta > 0.0 && !tr.logp_ref)
      throw ValidationError("grpo_objective: candidate " + std::to_string(c.index) +
                            " lacks reference log-probabilities but beta > 0");
    if (tr.logp_ref && tr.logp_ref->size() != tr.logp_new.size())
      throw ValidationError("grpo_objective: candidate " + std::to_string(c.index) +
                            " has mismatched logp_ref length");
    p.traces.push_back(&tr);
  }
  return p;
}

}  // namespace

ObjectiveBreakdown grpo_objective(const ResponseGroup& group, const RewardVector& rewards,
                                  const ObjectiveConfig& cfg) {
  const PreparedGroup p = prepare(group, rewards, cfg);
  const std::size_t g = p.traces.size();

  ObjectiveBreakdown out;
  out.per_response.reserve(g);
  for (std::size_t i = 0; i < g; ++i) {
    const TokenTrace& tr = *p.traces[i];
    const std::vector<double> ratios = importance_ratio(tr);
    const double len = static_cast<double>(ratios.size());

    ResponseTerms terms;
    terms.advantage = p.advantages[i];
    for (double r : ratios) terms.mean_clipped += clipped_term(r, terms.advantage, cfg);
    terms.mean_clipped /= len;
    if (tr.logp_ref) {
      for (std::size_t t = 0; t < ratios.size(); ++t)
        terms.mean_kl += kl_penalty_token(tr.logp_new[t], (*tr.logp_ref)[t]);
      terms.mean_kl /= len;
    }
    out.policy_term += terms.mean_clipped;
    out.kl_term += terms.mean_kl;
    out.per_response.push_back(terms);
  }
  out.policy_term /= static_cast<double>(g);
  out.kl_term /= static_cast<double>(g);
  out.objective = out.policy_term - cfg.beta * out.kl_term;
  return out;
}

std::vector<std::vector<double>> grpo_objective_gradient(const ResponseGroup& group,
                                                         const RewardVector& rewards,
                                                         const ObjectiveConfig& cfg) {
  const PreparedGroup p = prepare(group, rewards, cfg);
  const double g = static_cast<double>(p.traces.size());
  const double lo = 1.0 - cfg.eps_low;
  const double hi = 1.0 + cfg.eps_high;

  std::vector<std::vector<double>> grad;
  grad.reserve(p.traces.size());
  for (std::size_t i = 0; i < p.traces.size(); ++i) {
    const TokenTrace& tr = *p.traces[i];
    const double a = p.advantages[i];
    const double scale = 1.0 / (g * static_cast<double>(tr.logp_new.size()));
    std::vector<double> row(tr.logp_new.size(), 0.0);
    for (std::size_t t = 0; t < row.size(); ++t) {
      const double ratio = std::exp(tr.logp_new[t] - tr.logp_old[t]);
      const double clipped = std::clamp(ratio, lo, hi);
      // The min selects the unclipped branch unless the clipped one is smaller,
      // and the clipped branch is flat in logp_new.
      const bool unclipped_active = ratio * a <= clipped * a;
      double d = unclipped_active ? ratio * a : 0.0;
      if (cfg.beta > 0.0) {
        const double rho = std::exp((*tr.logp_ref)[t] - tr.logp_new[t]);
        d -= cfg.beta * (1.0 - rho);
      }
      row[t] = scale * d;
    }
    grad.push_back(std::move(row));
  }
  return grad;
}

}  // namespace cpo::policy
