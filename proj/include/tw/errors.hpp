#pragma once

#include <stdexcept>
#include <string>

namespace tw {

// Categories line up with the command-line exit codes (see tools/twave.cpp).
enum class ErrorKind {
  invalid_argument,
  config,
  convergence,
  assumption,
  io,
  integrity,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::invalid_argument, what);
}

const char* to_string(ErrorKind kind);

}  // namespace tw
