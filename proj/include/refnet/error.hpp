#pragma once

#include <stdexcept>
#include <string>

namespace refnet {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kParse,
  kIo,
  kNotFactorable,
  kNotConvergent,
  kUnsupportedDegree,
  kDomain,
  kDegreeTooSmall,
  kNotRefinable,
  kNoFollowingLayer,
  kEmptyDataset,
  kPositionOutOfRange,
  kEmptyArchitecture,
};

const char* ToString(ErrorCode code);

// Every failure in the library is reported through this type; the C API
// translates the code into a status value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace refnet
