#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wtc {

enum class ErrorKind {
  IllFormedHom,
  TypeMismatch,
  NotEnumerable,
  NotProper,
  ClassMismatch,
  InternalContradiction,
  HypothesisFailed,
  ScopeError,
  DegreeMismatch,
  MissingMap,
  MissingAnnotation,
  InjectivityFailure,
  ExactnessFailure,
  SimilitudeFailure,
  OverlapWarning,
  NotSmPic,
  ParseError,
  ValidationError,
  UnknownCommand,
  UsageError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure carries a kind and, where one exists, a concrete witness
/// (an element, an index, a named axiom) rendered as text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::string witness = {});

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& message() const noexcept { return message_; }
  const std::string& witness() const noexcept { return witness_; }

 private:
  ErrorKind kind_;
  std::string message_;
  std::string witness_;
};

}  // namespace wtc
