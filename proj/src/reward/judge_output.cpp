#include "cpo/reward/judge_output.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>

#include "cpo/core/error.hpp"

namespace cpo::reward {

using nlohmann::json;

std::vector<double> GroupScoreReport::scores() const {
  std::vector<double> s;
  s.reserve(entries.size());
  for (const auto& e : entries) s.push_back(e.score);
  return s;
}

void to_json(json& j, const GroupScoreReport& r) {
  json scores = json::object();
  for (const auto& e : r.entries) {
    scores[std::to_string(e.index)] = {{"analysis", e.analysis}, {"rank", e.rank}, {"score", e.score}};
  }
  j = json{{"scores", std::move(scores)},
           {"raw_judge_text", r.raw_judge_text},
           {"repaired", r.repaired},
           {"attempts", r.attempts},
           {"repair_notes", r.repair_notes}};
}

void from_json(const json& j, GroupScoreReport& r) {
  r.entries.clear();
  const auto& scores = j.at("scores");
  for (std::size_t i = 1; i <= scores.size(); ++i) {
    const auto& e = scores.at(std::to_string(i));
    r.entries.push_back({i, e.value("analysis", std::string{}), e.at("rank").get<int>(),
                         e.at("score").get<double>()});
  }
  r.raw_judge_text = j.value("raw_judge_text", std::string{});
  r.repaired = j.value("repaired", false);
  r.attempts = j.value("attempts", 1);
  r.repair_notes = j.value("repair_notes", std::vector<std::string>{});
}

namespace {

[[noreturn]] void fail(const std::string& what, std::string_view reply) {
  throw JudgeOutputError(what, 1, std::string(reply));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Removes commas that directly precede a closing bracket, outside strings.
std::string drop_trailing_commas(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      out.push_back(c);
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      out.push_back(c);
      continue;
    }
    if (c == ',') {
      std::size_t k = i + 1;
      while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
      if (k < s.size() && (s[k] == '}' || s[k] == ']')) continue;
    }
    out.push_back(c);
  }
  return out;
}

std::optional<double> as_number(const json& v, bool& coerced) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s(trim(v.get<std::string>()));
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(d)) return std::nullopt;
    coerced = true;
    return d;
  }
  return std::nullopt;
}

std::optional<std::size_t> as_index_key(std::string_view key) {
  key = trim(key);
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), value);
  if (ec != std::errc() || ptr != key.data() + key.size() || value == 0) return std::nullopt;
  return value;
}

bool all_index_keys(const json& obj) {
  if (obj.empty()) return false;
  for (const auto& [k, v] : obj.items()) {
    if (!as_index_key(k)) return false;
  }
  return true;
}

std::string text_of(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return {};
  return v.dump();
}

std::vector<int> ranks_from_scores(const std::vector<CandidateAssessment>& entries) {
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return entries[a].score > entries[b].score;
  });
  std::vector<int> ranks(entries.size());
  for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = static_cast<int>(r + 1);
  return ranks;
}

// Lowercase with spaces, underscores and hyphens removed.
std::string normalize_key(std::string_view k) {
  std::string out;
  for (unsigned char c : k) {
    if (c == ' ' || c == '_' || c == '-') continue;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

}  // namespace

std::optional<std::pair<std::size_t, std::size_t>> find_balanced_object(std::string_view text,
                                                                        std::size_t from) {
  const std::size_t start = text.find('{', from);
  if (start == std::string_view::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return std::make_pair(start, i + 1);
    }
  }
  return std::nullopt;
}

LenientObject parse_lenient_object(std::string_view reply) {
  LenientObject out;
  const std::string_view trimmed = trim(reply);
  if (trimmed.empty()) fail("judge reply is empty", reply);

  if (trimmed.front() == '{') {
    json j = json::parse(trimmed.begin(), trimmed.end(), nullptr, false);
    if (!j.is_discarded() && j.is_object()) {
      out.value = std::move(j);
      return out;
    }
  }

  std::size_t from = 0;
  while (from < reply.size()) {
    const std::size_t open = reply.find('{', from);
    if (open == std::string_view::npos) break;
    const auto span = find_balanced_object(reply, open);
    if (span) {
      const std::string_view candidate = reply.substr(span->first, span->second - span->first);
      json j = json::parse(candidate.begin(), candidate.end(), nullptr, false);
      if (!j.is_discarded() && j.is_object()) {
        out.value = std::move(j);
        out.repaired = true;
        out.notes.push_back("extracted JSON object from surrounding text");
        return out;
      }
      const std::string fixed = drop_trailing_commas(candidate);
      j = json::parse(fixed, nullptr, false);
      if (!j.is_discarded() && j.is_object()) {
        out.value = std::move(j);
        out.repaired = true;
        out.notes.push_back("removed trailing commas");
        if (span->first != static_cast<std::size_t>(trimmed.data() - reply.data()) ||
            span->second - span->first != trimmed.size())
          out.notes.push_back("extracted JSON object from surrounding text");
        return out;
      }
    }
    from = open + 1;
  }
  fail("no parseable JSON object in judge reply", reply);
}

bool ranks_consistent(const std::vector<CandidateAssessment>& entries) {
  std::vector<bool> seen(entries.size() + 1, false);
  for (const auto& e : entries) {
    if (e.rank < 1 || static_cast<std::size_t>(e.rank) > entries.size() || seen[e.rank]) return false;
    seen[e.rank] = true;
  }
  for (const auto& a : entries) {
    for (const auto& b : entries) {
      if (a.score > b.score && a.rank > b.rank) return false;
    }
  }
  return true;
}

GroupScoreReport parse_group_scores(std::string_view reply, std::size_t group_size) {
  if (group_size == 0) throw ValidationError("parse_group_scores: empty group");
  LenientObject obj = parse_lenient_object(reply);

  GroupScoreReport report;
  report.raw_judge_text = std::string(reply);
  report.repaired = obj.repaired;
  report.repair_notes = std::move(obj.notes);

  json root = std::move(obj.value);
  // {"scores": {"1": ...}} and similar single-key wrappers.
  if (!all_index_keys(root) && root.size() == 1 && root.begin()->is_object() &&
      all_index_keys(*root.begin())) {
    report.repair_notes.push_back("unwrapped key '" + root.begin().key() + "'");
    report.repaired = true;
    json inner = *root.begin();
    root = std::move(inner);
  }

  std::map<std::size_t, const json*> by_index;
  for (const auto& [key, value] : root.items()) {
    const auto idx = as_index_key(key);
    if (!idx) fail("index mismatch: unexpected key '" + key + "'", reply);
    if (!by_index.emplace(*idx, &value).second)
      fail("index mismatch: duplicate index " + std::to_string(*idx), reply);
  }
  if (by_index.size() != group_size || by_index.begin()->first != 1 ||
      by_index.rbegin()->first != group_size) {
    std::string got;
    for (const auto& [k, v] : by_index) got += (got.empty() ? "" : ",") + std::to_string(k);
    fail("index mismatch: expected indices 1.." + std::to_string(group_size) + ", got {" + got + "}",
         reply);
  }

  bool ranks_missing = false;
  for (const auto& [idx, value] : by_index) {
    const json& e = *value;
    if (!e.is_object()) fail("entry " + std::to_string(idx) + " is not an object", reply);
    CandidateAssessment a;
    a.index = idx;

    auto sit = e.find("score");
    if (sit == e.end()) fail("entry " + std::to_string(idx) + " has no score", reply);
    bool coerced = false;
    const auto score = as_number(*sit, coerced);
    if (!score) fail("entry " + std::to_string(idx) + " has a non-numeric score", reply);
    if (coerced) {
      report.repaired = true;
      report.repair_notes.push_back("coerced string score of entry " + std::to_string(idx));
    }
    a.score = *score;
    if (a.score < 0.0 || a.score > 1.0) {
      report.repaired = true;
      report.repair_notes.push_back("clipped score " + std::to_string(a.score) + " of entry " +
                                    std::to_string(idx));
      a.score = std::clamp(a.score, 0.0, 1.0);
    }

    auto rit = e.find("rank");
    bool rank_coerced = false;
    const auto rank = rit == e.end() ? std::nullopt : as_number(*rit, rank_coerced);
    if (!rank || *rank != std::floor(*rank)) {
      ranks_missing = true;
      a.rank = 0;
    } else {
      a.rank = static_cast<int>(*rank);
      if (rank_coerced) {
        report.repaired = true;
        report.repair_notes.push_back("coerced string rank of entry " + std::to_string(idx));
      }
    }

    if (auto ait = e.find("analysis"); ait != e.end()) a.analysis = text_of(*ait);
    report.entries.push_back(std::move(a));
  }

  if (ranks_missing || !ranks_consistent(report.entries)) {
    const auto ranks = ranks_from_scores(report.entries);
    for (std::size_t i = 0; i < ranks.size(); ++i) report.entries[i].rank = ranks[i];
    // A single candidate has nothing to rank against.
    if (group_size > 1) {
      report.repaired = true;
      report.repair_notes.push_back(ranks_missing ? "recomputed missing ranks from scores"
                                                  : "recomputed ranks inconsistent with scores");
    }
  }
  return report;
}

PairwiseReply parse_pairwise_reply(std::string_view reply) {
  LenientObject obj = parse_lenient_object(reply);
  PairwiseReply out;
  out.repaired = obj.repaired;

  const json* rank = nullptr;
  for (const auto& [key, value] : obj.value.items()) {
    const std::string k = normalize_key(key);
    if (k == "analysisa") {
      out.analysis_first = text_of(value);
    } else if (k == "analysisb") {
      out.analysis_second = text_of(value);
    } else if (k == "comparisonab" || k == "comparison") {
      out.comparison = text_of(value);
    } else if (k == "rank" || k == "winner") {
      rank = &value;
    }
  }
  if (!rank || !rank->is_string()) fail("verdict has no string \"rank\" field", reply);

  const std::string raw = rank->get<std::string>();
  std::string v(trim(raw));
  if (v == "A") {
    out.winner = PresentedWinner::first;
  } else if (v == "B") {
    out.winner = PresentedWinner::second;
  } else if (v == "Tie") {
    out.winner = PresentedWinner::tie;
  } else {
    std::string upper;
    for (unsigned char c : v) upper.push_back(static_cast<char>(std::toupper(c)));
    if (upper == "A" || upper == "DIALOGUE A") {
      out.winner = PresentedWinner::first;
    } else if (upper == "B" || upper == "DIALOGUE B") {
      out.winner = PresentedWinner::second;
    } else if (upper == "TIE" || upper == "DRAW" || v == "平局") {
      out.winner = PresentedWinner::tie;
    } else {
      fail("unrecognized rank value '" + raw + "'", reply);
    }
    out.repaired = true;
  }
  return out;
}

}  // namespace cpo::reward
