#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cdiff {

enum class ErrorCode {
  kUnsupportedDimension,
  kDomain,
  kOutOfDomain,
  kShape,
  kConfig,
  kPackingInfeasible,
  kStepTooLarge,
  kUnresolvedCollision,
  kInstability,
  kBracketing,
  kInvariant,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// runner can map it to a distinct process exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace cdiff
