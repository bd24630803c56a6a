// Error taxonomy shared by the library and the CLI.
// Exit codes: 2 = bad argument, 3 = unmet precondition, 4 = resource cap.

#pragma once

#include <stdexcept>
#include <string>

namespace qds {

class Error : public std::runtime_error {
 public:
  Error(int exit_code, const std::string& what)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error(2, what) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what) : Error(3, what) {}
};

class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& what) : Error(4, what) {}
};

}  // namespace qds
