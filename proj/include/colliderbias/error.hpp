#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace colliderbias {

enum class ErrorCode {
  OutOfRange,
  MissingField,
  ExtraField,
  DegenerateStratum,
  UndefinedRatio,
  SingularDesign,
  UnknownVariable,
  InvalidResolution,
  UnsupportedQuery,
  ParseError,
};

std::string_view to_string(ErrorCode code);

// Every recoverable failure in the library is reported through this type. The
// code is stable; the message names the offending field or variable.
class BiasError : public std::runtime_error {
 public:
  BiasError(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace colliderbias
