#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cpo::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kPartialFailure = 1;
inline constexpr int kConfigOrIoFailure = 2;

// Runs the command line (args excludes the program name). Data goes to out,
// logs and error summaries to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cpo::cli
