#pragma once

#include <stdexcept>
#include <string>

namespace pairlr {

/// Failure categories surfaced by the library. The CLI maps these onto exit
/// codes, so new kinds must be added to `exit_code_for` as well.
enum class ErrorKind {
  DegenerateTable,
  NotApplicable,
  InvalidDependence,
  InvalidArgument,
  FiellerInvalid,
  BootstrapDegenerate,
  ResampleExhausted,
  InvalidPrecision,
  NonPositiveBracket,
  NotConverged,
  ParseError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateTable: return "DegenerateTable";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::InvalidDependence: return "InvalidDependence";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::FiellerInvalid: return "FiellerInvalid";
    case ErrorKind::BootstrapDegenerate: return "BootstrapDegenerate";
    case ErrorKind::ResampleExhausted: return "ResampleExhausted";
    case ErrorKind::InvalidPrecision: return "InvalidPrecision";
    case ErrorKind::NonPositiveBracket: return "NonPositiveBracket";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pairlr
