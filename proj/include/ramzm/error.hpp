#pragma once

#include <stdexcept>
#include <string>

namespace ramzm {

enum class ErrorKind {
  InvalidArgument,
  AlphaNotUnity,
  StepTooSmall,
  AliasError,
  NotInSmallSignal,
  Infeasible,
  NoSolution,
  ConfigError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::AlphaNotUnity: return "AlphaNotUnity";
    case ErrorKind::StepTooSmall: return "StepTooSmall";
    case ErrorKind::AliasError: return "AliasError";
    case ErrorKind::NotInSmallSignal: return "NotInSmallSignal";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::NoSolution: return "NoSolution";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Single exception type for every model, oracle and configuration failure.
/// The kind lets callers (the CLI in particular) map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

}  // namespace ramzm
