#pragma once

#include <stdexcept>
#include <string>

namespace conefreq {

// Error categories surfaced through the C API as integer codes.
enum class ErrorKind {
  Domain = 1,
  Mesh,
  Range,
  Parameter,
  Diverged,
  Assembly,
  Degenerate,
  Unreliable,
  Monotonicity,
  EmptyRange,
  Multiplicity,
  Config,
  Io,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace conefreq
