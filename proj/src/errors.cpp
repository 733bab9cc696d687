#include "tkmeans/errors.hpp"

namespace tkm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TransformSingular: return "TransformSingular";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::TooManyClusters: return "TooManyClusters";
    case ErrorCode::DegenerateClassCount: return "DegenerateClassCount";
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

}  // namespace tkm
