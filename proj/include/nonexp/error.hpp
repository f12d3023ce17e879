#pragma once

#include <stdexcept>
#include <string>

namespace nonexp {

enum class ErrorCode {
  kInvalidArgument = 1,
  kDimensionMismatch,
  kOutsideBall,
  kNotNonexpansive,
  kNoConvergence,
  kCertificationFailed,
  kUnsupported,
  kNoPairFound,
  kDegenerate,
  kSchema,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure in the library surfaces as an Error; the C API maps the code
// onto its status enum.
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

}  // namespace nonexp
