#pragma once

#include <stdexcept>
#include <string>

namespace lcpool {

// Mirrors the status codes of the C API (lcpool.h).
enum class ErrorCode {
  invalid_argument = 1,
  shape_mismatch = 2,
  io = 3,
  format = 4,
  precondition = 5,
  numeric = 6,
  internal = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace lcpool
