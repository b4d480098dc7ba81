#pragma once

#include <stdexcept>
#include <string>

namespace specshift {

/// Failure categories. The command-line tool maps each one to an exit code.
enum class ErrorKind {
  invalid_argument,  // violated precondition or bad configuration
  data,              // unreadable or malformed input data
  numeric,           // non-finite values during computation
  checkpoint,        // incompatible or corrupt checkpoint
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::invalid_argument, what);
}

const char* to_string(ErrorKind kind) noexcept;

}  // namespace specshift
