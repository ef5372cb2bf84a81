#pragma once

// External JSON forms of the domain types. Field names follow the documented
// schemas in docs/schemas.md; every top-level record written to disk carries
// "schema_version".

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpo/core/error.hpp"
#include "cpo/core/types.hpp"

namespace cpo {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void to_json(json& j, const CharacterProfile& v);
void from_json(const json& j, CharacterProfile& v);
void to_json(json& j, const ChatCircumstance& v);
void from_json(const json& j, ChatCircumstance& v);
void to_json(json& j, const Turn& v);
void from_json(const json& j, Turn& v);
void to_json(json& j, const Trajectory& v);
void from_json(const json& j, Trajectory& v);
void to_json(json& j, const QueryContext& v);
void from_json(const json& j, QueryContext& v);
void to_json(json& j, const TokenTrace& v);
void from_json(const json& j, TokenTrace& v);
void to_json(json& j, const Candidate& v);
void from_json(const json& j, Candidate& v);
void to_json(json& j, const ResponseGroup& v);
void from_json(const json& j, ResponseGroup& v);
void to_json(json& j, const RewardVector& v);
void from_json(const json& j, RewardVector& v);
void to_json(json& j, const JudgeVerdict& v);
void from_json(const json& j, JudgeVerdict& v);
void to_json(json& j, const OutcomeCounts& v);
void from_json(const json& j, OutcomeCounts& v);
void to_json(json& j, const WinRateMatrix& v);
void from_json(const json& j, WinRateMatrix& v);
void to_json(json& j, const AnnotationRecord& v);
void from_json(const json& j, AnnotationRecord& v);

// Deterministic text form: keys sorted (nlohmann::json default), no
// insignificant whitespace unless indent >= 0. Used wherever byte identity
// matters (matrix.json, fingerprints, service canonicalization).
std::string canonical_dump(const json& j, int indent = -1);

template <class T>
T parse_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(where + ": " + e.what());
  } catch (const Error& e) {
    throw SchemaError(where + ": " + e.what());
  }
}

// Reads a JSON-Lines file. Blank lines are skipped; parse failures name the
// 1-based line number.
std::vector<json> read_jsonl(const std::filesystem::path& path);

template <class T>
std::vector<T> read_jsonl_as(const std::filesystem::path& path) {
  std::vector<T> out;
  const auto lines = read_jsonl(path);
  out.reserve(lines.size());
  std::size_t n = 0;
  for (const auto& j : lines) {
    ++n;
    out.push_back(parse_as<T>(j, path.string() + ": record " + std::to_string(n)));
  }
  return out;
}

// Calls fn(line_number, parsed-or-error) for every nonblank line; used where a
// bad line must not abort the whole file.
void for_each_jsonl_line(const std::filesystem::path& path,
                         const std::function<void(std::size_t, const std::string&)>& fn);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records);

std::vector<ChatCircumstance> load_corpus(const std::filesystem::path& path);

}  // namespace cpo
