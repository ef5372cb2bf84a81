#include "cpo/service/annotation_store.hpp"

#include <sqlite3.h>

#include "cpo/core/json.hpp"
#include "cpo/core/random.hpp"

namespace cpo::service {

namespace {

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw IoError(std::string("sqlite prepare failed: ") + sqlite3_errmsg(db));
    }
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int i, const std::string& v) {
    sqlite3_bind_text(stmt_, i, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Statement& bind(int i, long long v) {
    sqlite3_bind_int64(stmt_, i, v);
    return *this;
  }
  Statement& bind(int i, int v) { return bind(i, static_cast<long long>(v)); }

  // true while a row is available.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw IoError(std::string("sqlite step failed: ") + sqlite3_errmsg(db_));
  }
  std::string text(int col) const {
    const auto* p = sqlite3_column_text(stmt_, col);
    return p ? reinterpret_cast<const char*>(p) : "";
  }
  long long integer(int col) const { return sqlite3_column_int64(stmt_, col); }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

json turns_json(const std::vector<Turn>& turns) {
  json arr = json::array();
  for (const auto& t : turns) arr.push_back(t);
  return arr;
}

}  // namespace

nlohmann::json client_view(const AnnotationTask& task, std::size_t done, std::size_t total) {
  auto side = [](const std::vector<Turn>& turns) {
    json arr = json::array();
    for (const auto& t : turns) arr.push_back({{"role", to_string(t.role)}, {"text", t.text}});
    return arr;
  };
  return {{"schema_version", kSchemaVersion},
          {"pair_id", task.pair_id},
          {"character_name", task.character_name},
          {"scenario", task.scenario_text},
          {"left", side(task.left)},
          {"right", side(task.right)},
          {"status", task.status},
          {"progress", {{"done", done}, {"total", total}}}};
}

AnnotationStore::AnnotationStore(const std::filesystem::path& db_path, int annotators_per_pair)
    : annotators_per_pair_(annotators_per_pair) {
  if (annotators_per_pair < 1) throw ValidationError("annotators_per_pair must be >= 1");
  if (db_path.has_parent_path()) std::filesystem::create_directories(db_path.parent_path());
  if (sqlite3_open(db_path.string().c_str(), &db_) != SQLITE_OK) {
    const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw IoError("cannot open annotation store " + db_path.string() + ": " + msg);
  }
  exec("PRAGMA journal_mode=WAL;");
  exec(
      "CREATE TABLE IF NOT EXISTS pairs ("
      " pair_id TEXT PRIMARY KEY, model_a TEXT NOT NULL, model_b TEXT NOT NULL,"
      " judge_winner TEXT NOT NULL, left_is_a INTEGER NOT NULL, character_name TEXT NOT NULL,"
      " scenario_text TEXT NOT NULL, left_turns TEXT NOT NULL, right_turns TEXT NOT NULL);"
      "CREATE TABLE IF NOT EXISTS assignments ("
      " pair_id TEXT NOT NULL, annotator_id TEXT NOT NULL, PRIMARY KEY (pair_id, annotator_id));"
      "CREATE TABLE IF NOT EXISTS annotations ("
      " pair_id TEXT NOT NULL, annotator_id TEXT NOT NULL, label TEXT NOT NULL, submitted_at TEXT NOT NULL,"
      " PRIMARY KEY (pair_id, annotator_id));");
}

AnnotationStore::~AnnotationStore() { sqlite3_close(db_); }

void AnnotationStore::exec(const std::string& sql) const {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    const std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw IoError("sqlite: " + msg);
  }
}

void AnnotationStore::import_pair(const arena::MatchupResult& result, const ChatCircumstance& circumstance,
                                  std::uint64_t seed) {
  const bool left_is_a = (SplitMixRng(derive_seed(seed, {fnv1a64("annotation-side")})).next() & 1U) == 0;
  const auto& left = left_is_a ? result.trajectory_a : result.trajectory_b;
  const auto& right = left_is_a ? result.trajectory_b : result.trajectory_a;
  std::lock_guard lock(mu_);
  Statement st(db_,
               "INSERT OR IGNORE INTO pairs (pair_id, model_a, model_b, judge_winner, left_is_a, character_name,"
               " scenario_text, left_turns, right_turns) VALUES (?,?,?,?,?,?,?,?,?)");
  st.bind(1, result.entry.pair_id)
      .bind(2, result.entry.model_a)
      .bind(3, result.entry.model_b)
      .bind(4, std::string(to_string(result.verdict.winner)))
      .bind(5, left_is_a ? 1 : 0)
      .bind(6, circumstance.profile.name)
      .bind(7, circumstance.scenario_text)
      .bind(8, turns_json(left.turns).dump())
      .bind(9, turns_json(right.turns).dump());
  st.step();
}

AnnotationTask AnnotationStore::load_task(const std::string& pair_id) const {
  Statement st(db_,
               "SELECT character_name, scenario_text, left_turns, right_turns, left_is_a FROM pairs WHERE pair_id = ?");
  st.bind(1, pair_id);
  if (!st.step()) throw ValidationError("unknown pair " + pair_id);
  AnnotationTask t;
  t.pair_id = pair_id;
  t.character_name = st.text(0);
  t.scenario_text = st.text(1);
  t.left = json::parse(st.text(2)).get<std::vector<Turn>>();
  t.right = json::parse(st.text(3)).get<std::vector<Turn>>();
  t.left_is_a = st.integer(4) != 0;
  t.status = "assigned";
  return t;
}

std::optional<AnnotationTask> AnnotationStore::next_task(const std::string& annotator_id) {
  if (annotator_id.empty()) throw ValidationError("annotator_id is required");
  std::lock_guard lock(mu_);
  {
    Statement held(db_,
                   "SELECT a.pair_id FROM assignments a LEFT JOIN annotations n"
                   " ON n.pair_id = a.pair_id AND n.annotator_id = a.annotator_id"
                   " WHERE a.annotator_id = ? AND n.pair_id IS NULL ORDER BY a.pair_id LIMIT 1");
    held.bind(1, annotator_id);
    if (held.step()) return load_task(held.text(0));
  }
  std::string pair_id;
  {
    Statement pick(db_,
                   "SELECT p.pair_id FROM pairs p LEFT JOIN assignments a ON a.pair_id = p.pair_id"
                   " WHERE p.pair_id NOT IN (SELECT pair_id FROM assignments WHERE annotator_id = ?)"
                   " GROUP BY p.pair_id HAVING COUNT(a.annotator_id) < ?"
                   " ORDER BY COUNT(a.annotator_id), p.pair_id LIMIT 1");
    pick.bind(1, annotator_id).bind(2, annotators_per_pair_);
    if (!pick.step()) return std::nullopt;
    pair_id = pick.text(0);
  }
  Statement assign(db_, "INSERT INTO assignments (pair_id, annotator_id) VALUES (?, ?)");
  assign.bind(1, pair_id).bind(2, annotator_id);
  assign.step();
  return load_task(pair_id);
}

SubmitResult AnnotationStore::submit(const std::string& pair_id, const std::string& annotator_id,
                                     const std::string& label, const std::string& submitted_at) {
  if (label != "left" && label != "right" && label != "tie") {
    throw ValidationError("label must be left, right or tie");
  }
  std::lock_guard lock(mu_);
  bool left_is_a = true;
  {
    Statement st(db_, "SELECT left_is_a FROM pairs WHERE pair_id = ?");
    st.bind(1, pair_id);
    if (!st.step()) return {SubmitStatus::unknown_pair, std::nullopt};
    left_is_a = st.integer(0) != 0;
  }
  {
    Statement st(db_, "SELECT 1 FROM annotations WHERE pair_id = ? AND annotator_id = ?");
    st.bind(1, pair_id).bind(2, annotator_id);
    if (st.step()) return {SubmitStatus::duplicate, std::nullopt};
  }
  {
    Statement st(db_, "SELECT 1 FROM assignments WHERE pair_id = ? AND annotator_id = ?");
    st.bind(1, pair_id).bind(2, annotator_id);
    if (!st.step()) return {SubmitStatus::not_assigned, std::nullopt};
  }
  AnnotationRecord rec;
  rec.pair_id = pair_id;
  rec.annotator_id = annotator_id;
  rec.submitted_at = submitted_at;
  if (label == "tie") {
    rec.label = Outcome::tie;
  } else {
    const bool chose_left = label == "left";
    rec.label = chose_left == left_is_a ? Outcome::A : Outcome::B;
  }
  Statement st(db_, "INSERT INTO annotations (pair_id, annotator_id, label, submitted_at) VALUES (?,?,?,?)");
  st.bind(1, pair_id).bind(2, annotator_id).bind(3, std::string(to_string(rec.label))).bind(4, submitted_at);
  st.step();
  return {SubmitStatus::stored, rec};
}

std::vector<AnnotationRecord> AnnotationStore::annotations() const {
  std::lock_guard lock(mu_);
  Statement st(db_,
               "SELECT pair_id, annotator_id, label, submitted_at FROM annotations ORDER BY pair_id, annotator_id");
  std::vector<AnnotationRecord> out;
  while (st.step()) out.push_back({st.text(0), st.text(1), outcome_from_string(st.text(2)), st.text(3)});
  return out;
}

std::size_t AnnotationStore::pair_count() const {
  std::lock_guard lock(mu_);
  Statement st(db_, "SELECT COUNT(*) FROM pairs");
  st.step();
  return static_cast<std::size_t>(st.integer(0));
}

std::size_t AnnotationStore::done_count(const std::string& annotator_id) const {
  std::lock_guard lock(mu_);
  Statement st(db_, "SELECT COUNT(*) FROM annotations WHERE annotator_id = ?");
  st.bind(1, annotator_id);
  st.step();
  return static_cast<std::size_t>(st.integer(0));
}

bool AnnotationStore::has_pair(const std::string& pair_id) const {
  std::lock_guard lock(mu_);
  Statement st(db_, "SELECT 1 FROM pairs WHERE pair_id = ?");
  st.bind(1, pair_id);
  return st.step();
}

std::map<std::string, Outcome> AnnotationStore::judge_labels() const {
  std::lock_guard lock(mu_);
  Statement st(db_, "SELECT pair_id, judge_winner FROM pairs");
  std::map<std::string, Outcome> out;
  while (st.step()) out.emplace(st.text(0), outcome_from_string(st.text(1)));
  return out;
}

std::vector<std::tuple<std::string, std::string, Outcome>> AnnotationStore::judged_outcomes() const {
  std::lock_guard lock(mu_);
  Statement st(db_, "SELECT model_a, model_b, judge_winner FROM pairs ORDER BY pair_id");
  std::vector<std::tuple<std::string, std::string, Outcome>> out;
  while (st.step()) out.emplace_back(st.text(0), st.text(1), outcome_from_string(st.text(2)));
  return out;
}

void AnnotationStore::export_jsonl(const std::filesystem::path& path) const {
  std::vector<json> records;
  for (const auto& r : annotations()) {
    json j = r;
    records.push_back(std::move(j));
  }
  write_jsonl(path, records);
}

}  // namespace cpo::service
