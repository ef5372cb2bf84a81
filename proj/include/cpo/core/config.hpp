#pragma once

// Configuration loading. Files are JSON or a flat TOML subset; values are
// layered as config file < environment < command-line flag.

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

namespace cpo {

// TOML subset: comments, [table] and [a.b] headers, key = value with basic
// or literal strings, integers, floats, booleans and single-line arrays of
// those. Throws SchemaError naming the line on anything else.
nlohmann::json parse_toml_subset(std::string_view text, const std::string& where = "config");

// Chooses the parser by extension (.toml, otherwise JSON).
nlohmann::json load_config_file(const std::filesystem::path& path);

// Environment variable name for a dotted key: prefix + "JUDGE_BASE_URL"
// for "judge.base_url".
std::string env_name(std::string_view prefix, std::string_view dotted_key);

// For every dotted key whose environment variable is set, writes its value
// into cfg (parsed as a JSON scalar when possible, else kept as a string).
void overlay_env(nlohmann::json& cfg, std::string_view prefix, std::initializer_list<std::string_view> keys);

// Sets a dotted key, creating intermediate objects.
void set_dotted(nlohmann::json& cfg, std::string_view dotted_key, nlohmann::json value);

}  // namespace cpo
