#include <doctest.h>

#include <cmath>

#include "cpo/policy/objective.hpp"
#include "helpers.hpp"

using namespace cpo;
using namespace cpo::policy;

namespace {

ResponseGroup traced_group(const std::vector<std::vector<double>>& dnew, bool with_ref = true) {
  std::vector<std::string> texts(dnew.size(), "x");
  auto g = test::make_group(texts);
  for (std::size_t i = 0; i < dnew.size(); ++i) {
    TokenTrace t;
    t.logp_old.assign(dnew[i].size(), -1.0);
    for (double d : dnew[i]) t.logp_new.push_back(-1.0 + d);
    if (with_ref) t.logp_ref = t.logp_old;
    g.candidates[i].token_trace = t;
    g.candidates[i].length_tokens = dnew[i].size();
  }
  return g;
}

RewardVector rewards_of(std::vector<double> r) {
  RewardVector v;
  v.raw = r;
  v.final_reward = r;
  v.length_penalty.assign(r.size(), 0.0);
  return v;
}

}  // namespace

TEST_CASE("advantages of a two-point group") {
  const std::vector<double> r{1.0, 0.0};
  const auto a = compute_advantages(r);
  CHECK(a[0] == doctest::Approx(1.0));
  CHECK(a[1] == doctest::Approx(-1.0));
}

TEST_CASE("advantages with zero variance are zero") {
  const std::vector<double> r{0.4, 0.4, 0.4};
  for (double a : compute_advantages(r)) CHECK(a == 0.0);
  const std::vector<double> one{0.7};
  CHECK(compute_advantages(one) == std::vector<double>{0.0});
  CHECK_THROWS_AS(compute_advantages(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("importance ratio and clipped term") {
  TokenTrace t{{std::log(2.0), 0.0}, {0.0, 0.0}, std::nullopt};
  const auto r = importance_ratio(t);
  CHECK(r[0] == doctest::Approx(2.0));
  CHECK(r[1] == doctest::Approx(1.0));
  const ObjectiveConfig cfg;
  CHECK(clipped_term(2.0, 1.0, cfg) == doctest::Approx(1.28));
  CHECK(clipped_term(2.0, -1.0, cfg) == doctest::Approx(-2.0));
  CHECK(clipped_term(0.5, 1.0, cfg) == doctest::Approx(0.5));
  CHECK(clipped_term(0.5, -1.0, cfg) == doctest::Approx(-0.8));
  CHECK(clipped_term(1.1, 3.0, cfg) == doctest::Approx(3.3));
}

TEST_CASE("kl penalty hand values") {
  CHECK(kl_penalty_token(-1.0, -1.0) == 0.0);
  CHECK(kl_penalty_token(0.0, std::log(2.0)) == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-9));
  CHECK(kl_penalty_token(std::log(2.0), 0.0) == doctest::Approx(0.5 + std::log(2.0) - 1.0).epsilon(1e-9));
}

TEST_CASE("objective with identical policies reduces to mean advantage, which is zero") {
  const auto g = traced_group({{0.0, 0.0}, {0.0, 0.0, 0.0}});
  const auto b = grpo_objective(g, rewards_of({1.0, 0.0}), {});
  CHECK(b.objective == doctest::Approx(0.0));
  CHECK(b.kl_term == 0.0);
  CHECK(b.per_response[0].advantage == doctest::Approx(1.0));
}

TEST_CASE("objective hand value") {
  // Response 1: A=+1, ratio 2 clipped to 1.28. Response 2: A=-1, ratio 1.
  const auto g = traced_group({{std::log(2.0)}, {0.0}}, false);
  ObjectiveConfig cfg;
  cfg.beta = 0.0;
  const auto b = grpo_objective(g, rewards_of({1.0, 0.0}), cfg);
  CHECK(b.objective == doctest::Approx((1.28 - 1.0) / 2));
}

TEST_CASE("objective requires traces and reference log-probs") {
  auto g = traced_group({{0.0}, {0.0}}, false);
  CHECK_THROWS(grpo_objective(g, rewards_of({1.0, 0.0}), {}));
  g.candidates[1].token_trace.reset();
  ObjectiveConfig cfg;
  cfg.beta = 0.0;
  CHECK_THROWS(grpo_objective(g, rewards_of({1.0, 0.0}), cfg));
}

TEST_CASE("objective config json keeps defaults for missing keys") {
  const ObjectiveConfig c = nlohmann::json{{"beta", 0.5}}.get<ObjectiveConfig>();
  CHECK(c.beta == 0.5);
  CHECK(c.eps_low == 0.2);
  CHECK(c.eps_high == 0.28);
}
