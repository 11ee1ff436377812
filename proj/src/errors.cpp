#include "tw/errors.hpp"

namespace tw {

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::config: return "config error";
    case ErrorKind::convergence: return "convergence failure";
    case ErrorKind::assumption: return "assumption violation";
    case ErrorKind::io: return "i/o error";
    case ErrorKind::integrity: return "integrity error";
  }
  return "error";
}

}  // namespace tw
