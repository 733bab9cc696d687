#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tkm {

enum class ErrorCode {
  DimensionMismatch,
  InvalidArgument,
  TransformSingular,
  NumericalBreakdown,
  EmptyCluster,
  TooManyClusters,
  DegenerateClassCount,
  EmptyDocument,
  ParseError,
  ShapeMismatch,
  OutOfRange,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Exception type thrown by every module in the library. The code is stable
/// and meant for programmatic dispatch; what() carries a human message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tkm
