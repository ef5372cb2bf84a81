#pragma once

#include <stdexcept>
#include <string>

namespace cpo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed external data (JSON records, config files, corpora).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A value object violates one of its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// The judge replied, but the reply could not be turned into a verdict or
// score report even after the repair policy ran.
class JudgeOutputError : public Error {
 public:
  JudgeOutputError(const std::string& what, int attempts, std::string last_reply)
      : Error(what), attempts_(attempts), last_reply_(std::move(last_reply)) {}

  int attempts() const { return attempts_; }
  const std::string& last_reply() const { return last_reply_; }

 private:
  int attempts_;
  std::string last_reply_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cpo
