#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpo/arena/types.hpp"
#include "cpo/core/types.hpp"

namespace cpo::analytics {

// Tallies verdicts per model pair. Rates count ties as half a win; pairs
// without completed matchups keep an empty rate. When model_ids is empty it
// is taken from the results, sorted.
WinRateMatrix build_win_rate_matrix(std::span<const arena::MatchupResult> results,
                                    std::vector<std::string> model_ids = {});

struct PairOutcome {
  std::string model_a;
  std::string model_b;
  Outcome winner = Outcome::tie;
};

WinRateMatrix build_win_rate_matrix(std::span<const PairOutcome> outcomes, std::vector<std::string> model_ids = {});

struct RankedModel {
  std::string model_id;
  std::optional<double> mean_win_rate;   // over opponents with data
  std::size_t opponents_with_data = 0;
  std::optional<double> bradley_terry;   // strength, geometric mean 1
};

// Ordered by mean win rate (descending), ties by model id. Models without any
// data come last. Throws ValidationError when no pair has data.
std::vector<RankedModel> rank_models(const WinRateMatrix& matrix);

// Bradley-Terry strengths by minorization-maximization, ties split as half
// wins. Models without games get nullopt.
std::vector<std::optional<double>> bradley_terry(const WinRateMatrix& matrix, int max_iterations = 10000,
                                                 double tolerance = 1e-12);

double pearson(std::span<const double> x, std::span<const double> y);

// Strict plurality; nullopt marks an invalid sample (no unique top label).
std::optional<Outcome> majority_vote(std::span<const Outcome> labels);

struct KappaResult {
  double observed = 0.0;  // mean per-item agreement
  double expected = 0.0;  // chance agreement
  std::optional<double> kappa;  // empty when expected == 1
};

// Fixed-raters Fleiss' kappa over an items x categories count table.
KappaResult fleiss_kappa(const std::vector<std::vector<int>>& table, int raters_per_item);

struct ConfidenceBin {
  int agreeing = 0;    // annotators agreeing with the majority label
  int annotators = 0;  // annotators on the pair
  std::size_t sample_count = 0;
  std::size_t correct = 0;
  std::optional<double> judge_accuracy;

  double agreement_level() const { return static_cast<double>(agreeing) / annotators; }
};

// Buckets judged pairs by the agreement of their valid majority vote and
// measures how often the judge matches it. Every feasible agreement level of
// each annotator count present gets a bin, empty ones included.
std::vector<ConfidenceBin> accuracy_by_confidence(const std::map<std::string, Outcome>& judge_labels,
                                                  const std::map<std::string, std::vector<Outcome>>& annotations);

struct AgreementSummary {
  std::size_t pairs = 0;
  int raters_per_item = 0;
  std::size_t complete_pairs = 0;  // pairs with raters_per_item labels
  std::size_t invalid_count = 0;   // complete pairs without a majority
  std::optional<KappaResult> kappa;
  std::vector<ConfidenceBin> bins;  // only when judge labels are supplied
};

// Groups records by pair; raters_per_item is the largest label count seen and
// pairs with fewer labels are left out of kappa and invalid counting.
AgreementSummary summarize_agreement(std::span<const AnnotationRecord> records,
                                     const std::map<std::string, Outcome>* judge_labels = nullptr);

nlohmann::json to_json(const std::vector<RankedModel>& ranking);
nlohmann::json to_json(const ConfidenceBin& bin);
nlohmann::json to_json(const AgreementSummary& summary);

}  // namespace cpo::analytics
