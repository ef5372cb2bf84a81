#include "cpo/core/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cpo/core/error.hpp"
#include "cpo/core/json.hpp"

namespace cpo {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_dotted(std::string_view key) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    parts.emplace_back(trim(key.substr(start, dot - start)));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

class TomlLine {
 public:
  TomlLine(std::string_view text, std::string where) : s_(text), where_(std::move(where)) {}

  nlohmann::json value() {
    skip_ws();
    if (at_end()) fail("missing value");
    const char c = s_[i_];
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') return array();
    return scalar();
  }

  void expect_end() {
    skip_ws();
    if (!at_end() && s_[i_] != '#') fail("unexpected text after value");
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SchemaError(where_ + ": " + msg); }
  bool at_end() const { return i_ >= s_.size(); }
  void skip_ws() {
    while (!at_end() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
  }

  nlohmann::json basic_string() {
    std::string out;
    for (++i_; !at_end(); ++i_) {
      const char c = s_[i_];
      if (c == '"') {
        ++i_;
        return out;
      }
      if (c != '\\') {
        out += c;
        continue;
      }
      if (++i_ >= s_.size()) break;
      switch (s_[i_]) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(std::string("unsupported escape \\") + s_[i_]);
      }
    }
    fail("unterminated string");
  }

  nlohmann::json literal_string() {
    const auto end = s_.find('\'', i_ + 1);
    if (end == std::string_view::npos) fail("unterminated string");
    std::string out(s_.substr(i_ + 1, end - i_ - 1));
    i_ = end + 1;
    return out;
  }

  nlohmann::json array() {
    nlohmann::json arr = nlohmann::json::array();
    ++i_;
    while (true) {
      skip_ws();
      if (at_end()) fail("unterminated array");
      if (s_[i_] == ']') {
        ++i_;
        return arr;
      }
      arr.push_back(value());
      skip_ws();
      if (!at_end() && s_[i_] == ',') ++i_;
    }
  }

  nlohmann::json scalar() {
    std::size_t end = i_;
    while (end < s_.size() && s_[end] != ',' && s_[end] != ']' && s_[end] != '#' && s_[end] != ' ' &&
           s_[end] != '\t')
      ++end;
    std::string tok(s_.substr(i_, end - i_));
    i_ = end;
    if (tok == "true") return true;
    if (tok == "false") return false;
    std::string digits;
    for (char c : tok) {
      if (c != '_') digits += c;
    }
    try {
      std::size_t used = 0;
      if (digits.find_first_of(".eE") == std::string::npos) {
        const long long v = std::stoll(digits, &used);
        if (used == digits.size()) return v;
      } else {
        const double v = std::stod(digits, &used);
        if (used == digits.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("unsupported value '" + tok + "'");
  }

  std::string_view s_;
  std::size_t i_ = 0;
  std::string where_;
};

}  // namespace

void set_dotted(nlohmann::json& cfg, std::string_view dotted_key, nlohmann::json value) {
  nlohmann::json* node = &cfg;
  const auto parts = split_dotted(dotted_key);
  for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
    if (!node->is_object()) *node = nlohmann::json::object();
    node = &(*node)[parts[k]];
  }
  if (!node->is_object()) *node = nlohmann::json::object();
  (*node)[parts.back()] = std::move(value);
}

nlohmann::json parse_toml_subset(std::string_view text, const std::string& where) {
  nlohmann::json root = nlohmann::json::object();
  std::string table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string loc = where + ":" + std::to_string(line_no);
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      const auto close = line.find(']');
      if (close == std::string_view::npos || line.substr(0, 2) == "[[") {
        throw SchemaError(loc + ": unsupported table header");
      }
      table = std::string(trim(line.substr(1, close - 1)));
      if (table.empty()) throw SchemaError(loc + ": empty table name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw SchemaError(loc + ": expected key = value");
    std::string key(trim(line.substr(0, eq)));
    if (key.size() >= 2 && key.front() == '"' && key.back() == '"') key = key.substr(1, key.size() - 2);
    if (key.empty()) throw SchemaError(loc + ": empty key");
    TomlLine parser(line.substr(eq + 1), loc);
    nlohmann::json value = parser.value();
    parser.expect_end();
    set_dotted(root, table.empty() ? key : table + "." + key, std::move(value));
  }
  return root;
}

nlohmann::json load_config_file(const std::filesystem::path& path) {
  if (path.extension() == ".toml") {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_toml_subset(ss.str(), path.string());
  }
  return read_json_file(path);
}

std::string env_name(std::string_view prefix, std::string_view dotted_key) {
  std::string out(prefix);
  for (char c : dotted_key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

void overlay_env(nlohmann::json& cfg, std::string_view prefix, std::initializer_list<std::string_view> keys) {
  for (auto key : keys) {
    const char* v = std::getenv(env_name(prefix, key).c_str());
    if (v == nullptr) continue;
    nlohmann::json parsed = nlohmann::json::parse(v, nullptr, false);
    if (parsed.is_discarded() || parsed.is_object() || parsed.is_array()) parsed = std::string(v);
    set_dotted(cfg, key, std::move(parsed));
  }
}

}  // namespace cpo
