#include "specshift/error.hpp"

namespace specshift {

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument:
      return "invalid argument";
    case ErrorKind::data:
      return "data error";
    case ErrorKind::numeric:
      return "numeric failure";
    case ErrorKind::checkpoint:
      return "incompatible checkpoint";
  }
  return "error";
}

}  // namespace specshift
