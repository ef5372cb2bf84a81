#pragma once

#include <filesystem>
#include <map>
#include <tuple>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpo/arena/types.hpp"
#include "cpo/core/types.hpp"

struct sqlite3;

namespace cpo::service {

// A pair as shown to an annotator. The true A/B identity of each side stays
// in the store; `left_is_a` is never serialized to clients.
struct AnnotationTask {
  std::string pair_id;
  std::string character_name;
  std::string scenario_text;
  std::vector<Turn> left;
  std::vector<Turn> right;
  bool left_is_a = true;
  std::string status;  // open | assigned | done
};

// Client view: turns as {role, text}; no model ids, seeds or mapping.
nlohmann::json client_view(const AnnotationTask& task, std::size_t done, std::size_t total);

enum class SubmitStatus { stored, unknown_pair, not_assigned, duplicate };

struct SubmitResult {
  SubmitStatus status;
  std::optional<AnnotationRecord> record;
};

// Single-file SQLite store for annotation pairs, assignments and labels.
// All access is serialized by an internal mutex, so assignment is
// check-and-set.
class AnnotationStore {
 public:
  explicit AnnotationStore(const std::filesystem::path& db_path, int annotators_per_pair = 3);
  ~AnnotationStore();
  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  // Registers a completed matchup for human labeling. The left/right order is
  // drawn from seed; re-importing an existing pair is a no-op.
  void import_pair(const arena::MatchupResult& result, const ChatCircumstance& circumstance, std::uint64_t seed);

  // Next task for this annotator: a pair they already hold, else the open pair
  // with the fewest assignments below the cap. nullopt when nothing is left.
  std::optional<AnnotationTask> next_task(const std::string& annotator_id);

  // label is left | right | tie, unblinded to true A/B before storing.
  SubmitResult submit(const std::string& pair_id, const std::string& annotator_id, const std::string& label,
                      const std::string& submitted_at);

  std::vector<AnnotationRecord> annotations() const;
  std::size_t pair_count() const;
  std::size_t done_count(const std::string& annotator_id) const;
  bool has_pair(const std::string& pair_id) const;
  int annotators_per_pair() const { return annotators_per_pair_; }

  // Judge verdicts of the imported pairs, by pair_id.
  std::map<std::string, Outcome> judge_labels() const;
  // Completed matchups known to the store, for win-rate views.
  std::vector<std::tuple<std::string, std::string, Outcome>> judged_outcomes() const;

  void export_jsonl(const std::filesystem::path& path) const;

 private:
  void exec(const std::string& sql) const;
  AnnotationTask load_task(const std::string& pair_id) const;

  sqlite3* db_ = nullptr;
  int annotators_per_pair_;
  mutable std::mutex mu_;
};

}  // namespace cpo::service
