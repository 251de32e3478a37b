#pragma once

#include <stdexcept>
#include <string>

namespace mskit {

/// Failure category. The CLI maps `io` and `usage` to exit code 2 and
/// `compute` to exit code 1.
enum class ErrorKind { compute, io, usage };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(const std::string& what) {
  throw Error(ErrorKind::compute, what);
}

[[noreturn]] inline void fail_io(const std::string& what) {
  throw Error(ErrorKind::io, what);
}

[[noreturn]] inline void fail_usage(const std::string& what) {
  throw Error(ErrorKind::usage, what);
}

}  // namespace mskit
