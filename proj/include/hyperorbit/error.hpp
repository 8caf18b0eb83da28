#pragma once

#include <stdexcept>
#include <string>

namespace hyperorbit {

// Error categories map one-to-one onto the CLI exit codes.
enum class ErrorKind {
  Domain = 2,  // mathematically invalid input (non-commuting, not in K+, ...)
  Input = 3,   // malformed files or arguments
  Budget = 4,  // enumeration budget exceeded
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_domain(const std::string& what) {
  throw Error(ErrorKind::Domain, what);
}

[[noreturn]] inline void throw_input(const std::string& what) {
  throw Error(ErrorKind::Input, what);
}

}  // namespace hyperorbit
