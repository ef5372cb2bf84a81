#include "cpo/analytics/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "cpo/core/json.hpp"

namespace cpo::analytics {

namespace {

std::vector<std::string> ids_from(std::span<const PairOutcome> outcomes) {
  std::set<std::string> ids;
  for (const auto& o : outcomes) {
    ids.insert(o.model_a);
    ids.insert(o.model_b);
  }
  return {ids.begin(), ids.end()};
}

std::size_t category(Outcome o) { return static_cast<std::size_t>(o); }

}  // namespace

WinRateMatrix build_win_rate_matrix(std::span<const PairOutcome> outcomes, std::vector<std::string> model_ids) {
  WinRateMatrix m;
  m.model_ids = model_ids.empty() ? ids_from(outcomes) : std::move(model_ids);
  const std::size_t n = m.model_ids.size();
  m.counts.assign(n, std::vector<OutcomeCounts>(n));
  m.rates.assign(n, std::vector<std::optional<double>>(n));
  for (const auto& o : outcomes) {
    const auto ia = m.index_of(o.model_a);
    const auto ib = m.index_of(o.model_b);
    if (!ia || !ib) throw ValidationError("outcome for unknown model " + o.model_a + " vs " + o.model_b);
    if (*ia == *ib) throw ValidationError("model " + o.model_a + " matched against itself");
    OutcomeCounts& ab = m.counts[*ia][*ib];
    OutcomeCounts& ba = m.counts[*ib][*ia];
    switch (o.winner) {
      case Outcome::A: ++ab.wins; ++ba.losses; break;
      case Outcome::B: ++ab.losses; ++ba.wins; break;
      case Outcome::tie: ++ab.ties; ++ba.ties; break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& c = m.counts[i][j];
      if (i != j && c.total() > 0) m.rates[i][j] = (c.wins + 0.5 * c.ties) / c.total();
    }
  }
  return m;
}

WinRateMatrix build_win_rate_matrix(std::span<const arena::MatchupResult> results,
                                    std::vector<std::string> model_ids) {
  std::vector<PairOutcome> outcomes;
  outcomes.reserve(results.size());
  for (const auto& r : results) outcomes.push_back({r.entry.model_a, r.entry.model_b, r.verdict.winner});
  return build_win_rate_matrix(std::span<const PairOutcome>(outcomes), std::move(model_ids));
}

std::vector<std::optional<double>> bradley_terry(const WinRateMatrix& matrix, int max_iterations, double tolerance) {
  const std::size_t n = matrix.size();
  std::vector<double> wins(n, 0.0);
  std::vector<bool> played(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& c = matrix.counts[i][j];
      wins[i] += c.wins + 0.5 * c.ties;
      if (c.total() > 0) played[i] = true;
    }
  }
  std::vector<double> p(n, 1.0);
  for (int it = 0; it < max_iterations; ++it) {
    std::vector<double> next(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!played[i]) continue;
      double denom = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const int games = matrix.counts[i][j].total();
        if (j != i && games > 0) denom += games / (p[i] + p[j]);
      }
      next[i] = wins[i] / denom;
    }
    // Normalize to geometric mean 1 over models with positive strength.
    double log_sum = 0.0;
    std::size_t positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (played[i] && next[i] > 0.0) {
        log_sum += std::log(next[i]);
        ++positive;
      }
    }
    const double scale = positive ? std::exp(-log_sum / static_cast<double>(positive)) : 1.0;
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!played[i]) continue;
      next[i] *= scale;
      // A model that never scores drives everyone else's strength upward;
      // keep the zero and stop once the rest settles.
      delta = std::max(delta, std::abs(next[i] - p[i]));
      p[i] = std::max(next[i], 1e-300);
    }
    if (delta < tolerance) break;
  }
  std::vector<std::optional<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (played[i]) out[i] = wins[i] > 0.0 ? p[i] : 0.0;
  }
  return out;
}

std::vector<RankedModel> rank_models(const WinRateMatrix& matrix) {
  const std::size_t n = matrix.size();
  std::vector<RankedModel> out(n);
  bool any = false;
  const auto bt = bradley_terry(matrix);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].model_id = matrix.model_ids[i];
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (matrix.rates[i][j]) {
        sum += *matrix.rates[i][j];
        ++out[i].opponents_with_data;
      }
    }
    if (out[i].opponents_with_data > 0) {
      out[i].mean_win_rate = sum / static_cast<double>(out[i].opponents_with_data);
      any = true;
    }
    out[i].bradley_terry = bt[i];
  }
  if (!any) throw ValidationError("win-rate matrix has no completed matchups");
  std::sort(out.begin(), out.end(), [](const RankedModel& a, const RankedModel& b) {
    if (a.mean_win_rate.has_value() != b.mean_win_rate.has_value()) return a.mean_win_rate.has_value();
    if (a.mean_win_rate && *a.mean_win_rate != *b.mean_win_rate) return *a.mean_win_rate > *b.mean_win_rate;
    return a.model_id < b.model_id;
  });
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
  if (x.size() < 2) throw ValidationError("pearson: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<Outcome> majority_vote(std::span<const Outcome> labels) {
  if (labels.empty()) throw ValidationError("majority_vote: no labels");
  std::array<int, 3> counts{};
  for (Outcome o : labels) ++counts[category(o)];
  const int top = *std::max_element(counts.begin(), counts.end());
  if (std::count(counts.begin(), counts.end(), top) > 1) return std::nullopt;
  return static_cast<Outcome>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

KappaResult fleiss_kappa(const std::vector<std::vector<int>>& table, int raters_per_item) {
  if (raters_per_item < 2) throw ValidationError("fleiss_kappa: need at least 2 raters per item");
  if (table.size() < 2) throw ValidationError("fleiss_kappa: need at least 2 items");
  const std::size_t k = table.front().size();
  const double n = raters_per_item;
  std::vector<double> col(k, 0.0);
  double p_bar = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table[i];
    if (row.size() != k) throw ValidationError("fleiss_kappa: ragged table at item " + std::to_string(i));
    int sum = 0;
    double sq = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (row[j] < 0) throw ValidationError("fleiss_kappa: negative count at item " + std::to_string(i));
      sum += row[j];
      sq += static_cast<double>(row[j]) * row[j];
      col[j] += row[j];
    }
    if (sum != raters_per_item) {
      throw ValidationError("fleiss_kappa: item " + std::to_string(i) + " has " + std::to_string(sum) +
                            " ratings, expected " + std::to_string(raters_per_item));
    }
    p_bar += (sq - n) / (n * (n - 1.0));
  }
  const double items = static_cast<double>(table.size());
  p_bar /= items;
  double p_e = 0.0;
  for (double c : col) {
    const double pj = c / (items * n);
    p_e += pj * pj;
  }
  KappaResult r{p_bar, p_e, std::nullopt};
  if (p_e < 1.0) r.kappa = (p_bar - p_e) / (1.0 - p_e);
  return r;
}

std::vector<ConfidenceBin> accuracy_by_confidence(const std::map<std::string, Outcome>& judge_labels,
                                                  const std::map<std::string, std::vector<Outcome>>& annotations) {
  std::map<std::pair<int, int>, ConfidenceBin> bins;  // (annotators, agreeing)
  std::set<int> annotator_counts;
  for (const auto& [pair_id, labels] : annotations) {
    if (labels.empty()) continue;
    annotator_counts.insert(static_cast<int>(labels.size()));
  }
  // A plurality of m among n labels over three categories is possible iff
  // the remaining n - m labels fit in two categories with fewer than m each.
  for (int n : annotator_counts) {
    for (int m = 1; m <= n; ++m) {
      if (n - m <= 2 * (m - 1)) bins[{n, m}] = ConfidenceBin{m, n, 0, 0, std::nullopt};
    }
  }
  for (const auto& [pair_id, judge] : judge_labels) {
    auto it = annotations.find(pair_id);
    if (it == annotations.end() || it->second.empty()) continue;
    const auto& labels = it->second;
    const auto ref = majority_vote(labels);
    if (!ref) continue;
    const int agreeing = static_cast<int>(std::count(labels.begin(), labels.end(), *ref));
    ConfidenceBin& bin = bins.at({static_cast<int>(labels.size()), agreeing});
    ++bin.sample_count;
    if (judge == *ref) ++bin.correct;
  }
  std::vector<ConfidenceBin> out;
  for (auto& [key, bin] : bins) {
    if (bin.sample_count > 0) bin.judge_accuracy = static_cast<double>(bin.correct) / bin.sample_count;
    out.push_back(bin);
  }
  return out;
}

AgreementSummary summarize_agreement(std::span<const AnnotationRecord> records,
                                     const std::map<std::string, Outcome>* judge_labels) {
  std::map<std::string, std::vector<Outcome>> by_pair;
  for (const auto& r : records) by_pair[r.pair_id].push_back(r.label);
  AgreementSummary s;
  s.pairs = by_pair.size();
  for (const auto& [id, labels] : by_pair) s.raters_per_item = std::max(s.raters_per_item, static_cast<int>(labels.size()));

  std::vector<std::vector<int>> table;
  for (const auto& [id, labels] : by_pair) {
    if (static_cast<int>(labels.size()) != s.raters_per_item) continue;
    ++s.complete_pairs;
    if (!majority_vote(labels)) ++s.invalid_count;
    std::vector<int> row(3, 0);
    for (Outcome o : labels) ++row[category(o)];
    table.push_back(std::move(row));
  }
  if (s.raters_per_item >= 2 && table.size() >= 2) s.kappa = fleiss_kappa(table, s.raters_per_item);
  if (judge_labels) s.bins = accuracy_by_confidence(*judge_labels, by_pair);
  return s;
}

nlohmann::json to_json(const std::vector<RankedModel>& ranking) {
  nlohmann::json arr = nlohmann::json::array();
  std::size_t rank = 1;
  for (const auto& m : ranking) {
    arr.push_back({{"rank", rank++},
                   {"model_id", m.model_id},
                   {"mean_win_rate", m.mean_win_rate ? nlohmann::json(*m.mean_win_rate) : nlohmann::json()},
                   {"opponents_with_data", m.opponents_with_data},
                   {"bradley_terry", m.bradley_terry ? nlohmann::json(*m.bradley_terry) : nlohmann::json()}});
  }
  return arr;
}

nlohmann::json to_json(const ConfidenceBin& bin) {
  return {{"agreement", std::to_string(bin.agreeing) + "/" + std::to_string(bin.annotators)},
          {"agreement_level", bin.agreement_level()},
          {"sample_count", bin.sample_count},
          {"correct", bin.correct},
          {"judge_accuracy", bin.judge_accuracy ? nlohmann::json(*bin.judge_accuracy) : nlohmann::json()}};
}

nlohmann::json to_json(const AgreementSummary& s) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : s.bins) bins.push_back(to_json(b));
  nlohmann::json j{{"schema_version", kSchemaVersion},
                   {"pairs", s.pairs},
                   {"raters_per_item", s.raters_per_item},
                   {"complete_pairs", s.complete_pairs},
                   {"invalid_count", s.invalid_count},
                   {"kappa", nullptr},
                   {"observed_agreement", nullptr},
                   {"expected_agreement", nullptr},
                   {"bins", std::move(bins)}};
  if (s.kappa) {
    j["observed_agreement"] = s.kappa->observed;
    j["expected_agreement"] = s.kappa->expected;
    if (s.kappa->kappa) j["kappa"] = *s.kappa->kappa;
  }
  return j;
}

}  // namespace cpo::analytics
