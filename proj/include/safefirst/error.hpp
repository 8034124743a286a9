#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace safefirst {

enum class ErrorCode {
  LengthMismatch,
  NonFiniteValue,
  UnknownAction,
  EmptyActionCell,
  InsufficientCellSize,
  SingularDesign,
  DimensionMismatch,
  InvalidArgument,
  NonBinaryAction,
  MissingColumn,
  ParseError,
  DegenerateDistribution,
  IoError,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Every recoverable failure in the toolkit is reported as an Error carrying
/// a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace safefirst
