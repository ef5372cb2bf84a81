#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cpo/arena/types.hpp"
#include "cpo/core/types.hpp"
#include "cpo/gateway/chat.hpp"

namespace cpo::test {

inline std::filesystem::path fixture_dir() { return CPO_FIXTURE_DIR; }
inline std::filesystem::path sample_dir() { return CPO_SAMPLE_DIR; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "cpo");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

ChatCircumstance make_circumstance(const std::string& id, const std::string& name = "Mara");
QueryContext make_context(const std::string& name = "Mara");
// Candidates with the given texts and optional reported token lengths.
ResponseGroup make_group(const std::vector<std::string>& texts, const std::vector<std::size_t>& lengths = {});

// Endpoint routed to a transport registered under mock://name.
gateway::ChatEndpointConfig mock_endpoint(const std::string& name, const std::string& model = "m");

// Valid group-scoring reply for the given scores, ranks derived from them.
std::string group_reply(const std::vector<double>& scores);

Trajectory make_trajectory(const std::string& model, const std::vector<std::string>& bot_lines,
                           const std::string& circumstance_id = "c1");

}  // namespace cpo::test
