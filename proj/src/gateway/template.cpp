#include "cpo/gateway/template.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "builtin_prompts.hpp"

namespace cpo::gateway {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Length of a placeholder token starting at body[i] == '{', or 0.
std::size_t placeholder_len(std::string_view body, std::size_t i) {
  std::size_t k = i + 1;
  if (k >= body.size() || !ident_start(body[k])) return 0;
  while (k < body.size() && ident_char(body[k])) ++k;
  if (k >= body.size() || body[k] != '}') return 0;
  return k - i + 1;
}

template <class OnText, class OnPlaceholder>
void scan(std::string_view body, OnText on_text, OnPlaceholder on_placeholder) {
  std::size_t i = 0;
  while (i < body.size()) {
    const char c = body[i];
    if (c == '{') {
      if (const std::size_t len = placeholder_len(body, i)) {
        on_placeholder(body.substr(i + 1, len - 2));
        i += len;
      } else {
        on_text(body.substr(i, 1));
        ++i;
      }
    } else {
      const std::size_t next = body.find('{', i + 1);
      const std::size_t end = next == std::string_view::npos ? body.size() : next;
      on_text(body.substr(i, end - i));
      i = end;
    }
  }
}

}  // namespace

PromptTemplate PromptTemplate::from_body(std::string id, std::string body) {
  PromptTemplate t{std::move(id), std::move(body), {}};
  scan(
      t.body, [](std::string_view) {},
      [&](std::string_view name) { t.required_placeholders.emplace(name); });
  return t;
}

std::string render(const PromptTemplate& tmpl, const Bindings& bindings) {
  for (const auto& name : tmpl.required_placeholders) {
    if (bindings.find(name) == bindings.end()) throw UnboundPlaceholderError(name);
  }
  std::string out;
  out.reserve(tmpl.body.size());
  scan(
      tmpl.body, [&](std::string_view text) { out.append(text); },
      [&](std::string_view name) {
        auto it = bindings.find(name);
        if (it == bindings.end()) throw UnboundPlaceholderError(std::string(name));
        out.append(it->second);
      });
  return out;
}

PromptLibrary::PromptLibrary() {
  for (const auto& [id, body] : builtin_prompt_bodies()) add(PromptTemplate::from_body(std::string(id), std::string(body)));
}

void PromptLibrary::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("prompt directory not found: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    std::ostringstream ss;
    ss << in.rdbuf();
    add(PromptTemplate::from_body(entry.path().stem().string(), ss.str()));
  }
}

void PromptLibrary::add(PromptTemplate tmpl) {
  std::string id = tmpl.id;
  templates_.insert_or_assign(std::move(id), std::move(tmpl));
}

const PromptTemplate& PromptLibrary::get(std::string_view id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw Error("unknown prompt template '" + std::string(id) + "'");
  return it->second;
}

bool PromptLibrary::contains(std::string_view id) const { return templates_.find(id) != templates_.end(); }

const PromptTemplate& PromptLibrary::criterion(std::string_view criterion_id) const {
  if (criterion_id.empty() || criterion_id == "attractiveness") return get(prompt_ids::kRewardGroup);
  return get(criterion_id);
}

}  // namespace cpo::gateway
