#include "wtc/error.hpp"

namespace wtc {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::IllFormedHom: return "IllFormedHom";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::NotEnumerable: return "NotEnumerable";
    case ErrorKind::NotProper: return "NotProper";
    case ErrorKind::ClassMismatch: return "ClassMismatch";
    case ErrorKind::InternalContradiction: return "InternalContradiction";
    case ErrorKind::HypothesisFailed: return "HypothesisFailed";
    case ErrorKind::ScopeError: return "ScopeError";
    case ErrorKind::DegreeMismatch: return "DegreeMismatch";
    case ErrorKind::MissingMap: return "MissingMap";
    case ErrorKind::MissingAnnotation: return "MissingAnnotation";
    case ErrorKind::InjectivityFailure: return "InjectivityFailure";
    case ErrorKind::ExactnessFailure: return "ExactnessFailure";
    case ErrorKind::SimilitudeFailure: return "SimilitudeFailure";
    case ErrorKind::OverlapWarning: return "OverlapWarning";
    case ErrorKind::NotSmPic: return "NotSmPic";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::UnknownCommand: return "UnknownCommand";
    case ErrorKind::UsageError: return "UsageError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, std::string message, std::string witness)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message +
                         (witness.empty() ? "" : " [witness: " + witness + "]")),
      kind_(kind),
      message_(std::move(message)),
      witness_(std::move(witness)) {}

}  // namespace wtc
