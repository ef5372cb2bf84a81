#include "cpo/core/json.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "cpo/core/validate.hpp"

namespace cpo {

namespace {

template <class T>
void get_optional(const json& j, const char* key, std::optional<T>& out) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    out.reset();
  } else {
    out = it->get<T>();
  }
}

std::string get_string_or(const json& j, const char* key, std::string fallback = {}) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<std::string>();
}

}  // namespace

void to_json(json& j, const CharacterProfile& v) {
  j = json{{"id", v.id}, {"name", v.name}, {"profile_text", v.profile_text}};
  if (v.category) j["category"] = *v.category;
}

void from_json(const json& j, CharacterProfile& v) {
  v.id = j.at("id").get<std::string>();
  v.name = get_string_or(j, "name", v.id);
  v.profile_text = j.at("profile_text").get<std::string>();
  get_optional(j, "category", v.category);
}

void to_json(json& j, const ChatCircumstance& v) {
  j = json{{"id", v.id},
           {"profile", v.profile},
           {"scenario_text", v.scenario_text},
           {"opening_line", v.opening_line}};
}

void from_json(const json& j, ChatCircumstance& v) {
  v.id = j.at("id").get<std::string>();
  v.profile = j.at("profile").get<CharacterProfile>();
  v.scenario_text = j.at("scenario_text").get<std::string>();
  v.opening_line = j.at("opening_line").get<std::string>();
  validate(v);
}

void to_json(json& j, const Turn& v) {
  j = json{{"index", v.index}, {"role", to_string(v.role)}, {"text", v.text}};
}

void from_json(const json& j, Turn& v) {
  v.index = j.at("index").get<std::size_t>();
  v.role = role_from_string(j.at("role").get<std::string>());
  v.text = j.at("text").get<std::string>();
}

void to_json(json& j, const Trajectory& v) {
  j = json{{"schema_version", kSchemaVersion},
           {"circumstance_id", v.circumstance_id},
           {"model_id", v.model_id},
           {"seed", v.seed},
           {"created_at", v.created_at},
           {"turns", v.turns}};
}

void from_json(const json& j, Trajectory& v) {
  v.circumstance_id = j.at("circumstance_id").get<std::string>();
  v.model_id = j.at("model_id").get<std::string>();
  v.seed = j.at("seed").get<std::uint64_t>();
  v.created_at = get_string_or(j, "created_at");
  v.turns = j.at("turns").get<std::vector<Turn>>();
}

void to_json(json& j, const QueryContext& v) {
  j = json{{"profile", v.profile},
           {"scenario_text", v.scenario_text},
           {"history", v.history},
           {"criterion_id", v.criterion_id}};
}

void from_json(const json& j, QueryContext& v) {
  v.profile = j.at("profile").get<CharacterProfile>();
  v.scenario_text = get_string_or(j, "scenario_text");
  v.history = j.at("history").get<std::vector<Turn>>();
  v.criterion_id = get_string_or(j, "criterion_id", "attractiveness");
}

void to_json(json& j, const TokenTrace& v) {
  j = json{{"logp_new", v.logp_new}, {"logp_old", v.logp_old}};
  if (v.logp_ref) j["logp_ref"] = *v.logp_ref;
}

void from_json(const json& j, TokenTrace& v) {
  v.logp_new = j.at("logp_new").get<std::vector<double>>();
  v.logp_old = j.at("logp_old").get<std::vector<double>>();
  get_optional(j, "logp_ref", v.logp_ref);
}

void to_json(json& j, const Candidate& v) {
  j = json{{"index", v.index}, {"text", v.text}};
  if (v.length_tokens) j["length_tokens"] = *v.length_tokens;
  if (v.token_trace) j["token_trace"] = *v.token_trace;
}

void from_json(const json& j, Candidate& v) {
  v.index = j.value("index", std::size_t{0});
  v.text = j.at("text").get<std::string>();
  get_optional(j, "length_tokens", v.length_tokens);
  get_optional(j, "token_trace", v.token_trace);
}

void to_json(json& j, const ResponseGroup& v) {
  j = json{{"schema_version", kSchemaVersion},
           {"id", v.id},
           {"context", v.context},
           {"candidates", v.candidates}};
}

void from_json(const json& j, ResponseGroup& v) {
  v.id = get_string_or(j, "id");
  v.context = j.at("context").get<QueryContext>();
  v.candidates = j.at("candidates").get<std::vector<Candidate>>();
  // Index is optional on input; absent indices take their position.
  for (std::size_t i = 0; i < v.candidates.size(); ++i) {
    if (v.candidates[i].index == 0) v.candidates[i].index = i + 1;
  }
}

void to_json(json& j, const RewardVector& v) {
  j = json{{"raw", v.raw},
           {"length_penalty", v.length_penalty},
           {"final", v.final_reward},
           {"approximate", v.approximate}};
}

void from_json(const json& j, RewardVector& v) {
  v.raw = j.at("raw").get<std::vector<double>>();
  v.length_penalty = j.at("length_penalty").get<std::vector<double>>();
  v.final_reward = j.at("final").get<std::vector<double>>();
  v.approximate = j.value("approximate", false);
}

void to_json(json& j, const JudgeVerdict& v) {
  j = json{{"schema_version", kSchemaVersion},
           {"pair_id", v.pair_id},
           {"presented_first", to_string(v.presented_first)},
           {"winner", to_string(v.winner)},
           {"analysis_a", v.analysis_a},
           {"analysis_b", v.analysis_b},
           {"comparison", v.comparison},
           {"judge_model_id", v.judge_model_id},
           {"attempts", v.attempts},
           {"repaired", v.repaired}};
}

void from_json(const json& j, JudgeVerdict& v) {
  v.pair_id = j.at("pair_id").get<std::string>();
  v.presented_first = side_from_string(j.value("presented_first", std::string("A")));
  v.winner = outcome_from_string(j.at("winner").get<std::string>());
  v.analysis_a = get_string_or(j, "analysis_a");
  v.analysis_b = get_string_or(j, "analysis_b");
  v.comparison = get_string_or(j, "comparison");
  v.judge_model_id = get_string_or(j, "judge_model_id");
  v.attempts = j.value("attempts", 1);
  v.repaired = j.value("repaired", false);
}

void to_json(json& j, const OutcomeCounts& v) {
  j = json{{"wins", v.wins}, {"ties", v.ties}, {"losses", v.losses}};
}

void from_json(const json& j, OutcomeCounts& v) {
  v.wins = j.at("wins").get<int>();
  v.ties = j.at("ties").get<int>();
  v.losses = j.at("losses").get<int>();
}

void to_json(json& j, const WinRateMatrix& v) {
  json rates = json::array();
  for (const auto& row : v.rates) {
    json r = json::array();
    for (const auto& cell : row) r.push_back(cell ? json(*cell) : json(nullptr));
    rates.push_back(std::move(r));
  }
  j = json{{"schema_version", kSchemaVersion},
           {"model_ids", v.model_ids},
           {"counts", v.counts},
           {"rates", std::move(rates)},
           {"convention", {{"ties", "half_win"}, {"missing", "null"}}}};
}

void from_json(const json& j, WinRateMatrix& v) {
  v.model_ids = j.at("model_ids").get<std::vector<std::string>>();
  v.counts = j.at("counts").get<std::vector<std::vector<OutcomeCounts>>>();
  v.rates.clear();
  for (const auto& row : j.at("rates")) {
    std::vector<std::optional<double>> r;
    for (const auto& cell : row) {
      r.push_back(cell.is_null() ? std::nullopt : std::optional<double>(cell.get<double>()));
    }
    v.rates.push_back(std::move(r));
  }
  const std::size_t n = v.model_ids.size();
  if (v.counts.size() != n || v.rates.size() != n)
    throw SchemaError("win-rate matrix dimensions do not match model_ids");
}

void to_json(json& j, const AnnotationRecord& v) {
  j = json{{"schema_version", kSchemaVersion},
           {"pair_id", v.pair_id},
           {"annotator_id", v.annotator_id},
           {"label", to_string(v.label)},
           {"submitted_at", v.submitted_at}};
}

void from_json(const json& j, AnnotationRecord& v) {
  v.pair_id = j.at("pair_id").get<std::string>();
  v.annotator_id = j.at("annotator_id").get<std::string>();
  v.label = outcome_from_string(j.at("label").get<std::string>());
  v.submitted_at = get_string_or(j, "submitted_at");
}

std::string canonical_dump(const json& j, int indent) {
  return j.dump(indent, ' ', false, json::error_handler_t::strict);
}

void for_each_jsonl_line(const std::filesystem::path& path,
                         const std::function<void(std::size_t, const std::string&)>& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    fn(lineno, line);
  }
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::vector<json> out;
  for_each_jsonl_line(path, [&](std::size_t lineno, const std::string& line) {
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  });
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records) {
  std::ostringstream os;
  for (const auto& r : records) os << canonical_dump(r) << '\n';
  write_text_file(path, os.str());
}

std::vector<ChatCircumstance> load_corpus(const std::filesystem::path& path) {
  auto corpus = read_jsonl_as<ChatCircumstance>(path);
  std::unordered_set<std::string> seen;
  std::size_t n = 0;
  for (const auto& c : corpus) {
    ++n;
    if (!seen.insert(c.id).second)
      throw SchemaError(path.string() + ": duplicate circumstance id '" + c.id + "'");
    try {
      validate(c);
    } catch (const ValidationError& e) {
      throw SchemaError(path.string() + ": record " + std::to_string(n) + ": " + e.what());
    }
  }
  return corpus;
}

}  // namespace cpo
