#include <doctest.h>

#include <cmath>

#include "cpo/analytics/stats.hpp"

using namespace cpo;
using namespace cpo::analytics;

namespace {

std::vector<PairOutcome> outcomes(const std::string& a, const std::string& b, int wins, int ties, int losses) {
  std::vector<PairOutcome> v;
  for (int i = 0; i < wins; ++i) v.push_back({a, b, Outcome::A});
  for (int i = 0; i < ties; ++i) v.push_back({a, b, Outcome::tie});
  for (int i = 0; i < losses; ++i) v.push_back({a, b, Outcome::B});
  return v;
}

}  // namespace

TEST_CASE("win rate matrix counts ties as half") {
  auto v = outcomes("x", "y", 2, 1, 1);
  const auto m = build_win_rate_matrix(std::span<const PairOutcome>(v));
  CHECK(m.model_ids == std::vector<std::string>{"x", "y"});
  CHECK(m.counts[0][1] == OutcomeCounts{2, 1, 1});
  CHECK(m.counts[1][0] == OutcomeCounts{1, 1, 2});
  CHECK(*m.rates[0][1] == 0.625);
  CHECK(*m.rates[1][0] == 0.375);
  CHECK_FALSE(m.rates[0][0]);
}

TEST_CASE("orientation of outcomes does not matter") {
  auto v = outcomes("y", "x", 1, 0, 3);
  const auto m = build_win_rate_matrix(std::span<const PairOutcome>(v), {"x", "y"});
  CHECK(m.counts[0][1] == OutcomeCounts{3, 0, 1});
}

TEST_CASE("missing pairs stay empty and ranking skips them") {
  auto v = outcomes("a", "b", 3, 0, 1);
  const auto m = build_win_rate_matrix(std::span<const PairOutcome>(v), {"a", "b", "c"});
  CHECK_FALSE(m.rates[0][2]);
  const auto r = rank_models(m);
  CHECK(r[0].model_id == "a");
  CHECK(r[0].opponents_with_data == 1);
  CHECK(r[2].model_id == "c");
  CHECK_FALSE(r[2].mean_win_rate);
  CHECK_FALSE(r[2].bradley_terry);
  const auto empty = build_win_rate_matrix(std::span<const PairOutcome>(), {"a", "b"});
  CHECK_THROWS_AS(rank_models(empty), ValidationError);
}

TEST_CASE("bradley terry recovers the odds of a two-model series") {
  auto v = outcomes("a", "b", 3, 0, 1);
  const auto m = build_win_rate_matrix(std::span<const PairOutcome>(v));
  const auto s = bradley_terry(m);
  CHECK(*s[0] / *s[1] == doctest::Approx(3.0));
  CHECK(*s[0] * *s[1] == doctest::Approx(1.0));
}

TEST_CASE("pearson worked triples") {
  const std::vector<double> x{1, 2, 3};
  CHECK(pearson(x, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0));
  CHECK(pearson(x, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(pearson(x, std::vector<double>{1, 3, 2}) == doctest::Approx(0.5));
  CHECK_THROWS(pearson(x, std::vector<double>{1, 1, 1}));
  CHECK_THROWS(pearson(x, std::vector<double>{1, 2}));
}

TEST_CASE("majority vote") {
  using O = Outcome;
  CHECK(majority_vote(std::vector<O>{O::A, O::A, O::B}) == O::A);
  CHECK(majority_vote(std::vector<O>{O::tie, O::B, O::tie}) == O::tie);
  CHECK_FALSE(majority_vote(std::vector<O>{O::A, O::B, O::tie}));
  CHECK_FALSE(majority_vote(std::vector<O>{O::A, O::B}));
  CHECK_THROWS(majority_vote(std::vector<O>{}));
}

TEST_CASE("fleiss kappa hand values") {
  const auto perfect = fleiss_kappa({{3, 0}, {0, 3}}, 3);
  REQUIRE(perfect.kappa);
  CHECK(*perfect.kappa == doctest::Approx(1.0));
  CHECK(perfect.observed == 1.0);
  CHECK(perfect.expected == 0.5);
  const auto split = fleiss_kappa({{2, 1}, {1, 2}}, 3);
  REQUIRE(split.kappa);
  CHECK(*split.kappa == doctest::Approx(-1.0 / 3));
  CHECK(split.observed == doctest::Approx(1.0 / 3));
  const auto spread = fleiss_kappa({{1, 1, 1}, {1, 1, 1}}, 3);
  CHECK(*spread.kappa == doctest::Approx(-0.5));
  CHECK_FALSE(fleiss_kappa({{3, 0, 0}, {3, 0, 0}}, 3).kappa);
  CHECK_THROWS(fleiss_kappa({{2, 0, 0}}, 3));
}

TEST_CASE("confidence bins") {
  using O = Outcome;
  const std::map<std::string, O> judge{{"p1", O::A}, {"p2", O::B}, {"p3", O::A}, {"p4", O::A}};
  const std::map<std::string, std::vector<O>> ann{{"p1", {O::A, O::A, O::A}},
                                                  {"p2", {O::A, O::A, O::B}},
                                                  {"p3", {O::A, O::A, O::tie}},
                                                  {"p4", {O::A, O::B, O::tie}}};
  const auto bins = accuracy_by_confidence(judge, ann);
  REQUIRE(bins.size() == 2);
  CHECK(bins[0].agreeing == 2);
  CHECK(bins[0].sample_count == 2);
  CHECK(*bins[0].judge_accuracy == 0.5);
  CHECK(bins[1].agreeing == 3);
  CHECK(*bins[1].judge_accuracy == 1.0);
}

TEST_CASE("agreement summary excludes incomplete pairs") {
  using O = Outcome;
  std::vector<AnnotationRecord> r{{"p1", "a", O::A, ""}, {"p1", "b", O::A, ""}, {"p1", "c", O::A, ""},
                                  {"p2", "a", O::A, ""}, {"p2", "b", O::B, ""}, {"p2", "c", O::tie, ""},
                                  {"p3", "a", O::B, ""}};
  const auto s = summarize_agreement(r);
  CHECK(s.pairs == 3);
  CHECK(s.raters_per_item == 3);
  CHECK(s.complete_pairs == 2);
  CHECK(s.invalid_count == 1);
  REQUIRE(s.kappa);
  CHECK(s.bins.empty());
}
