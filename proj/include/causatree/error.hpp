#pragma once

#include <stdexcept>
#include <string>

namespace causatree {

// Failure categories. The CLI maps io/format/schema onto exit code 1 and
// precondition/estimation onto exit code 2.
enum class ErrorKind { io, format, schema, precondition, estimation };

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::io: return "io";
    case ErrorKind::format: return "format";
    case ErrorKind::schema: return "schema";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::estimation: return "estimation";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace causatree
