#pragma once

#include <stdexcept>
#include <string>

namespace stableinfer {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numeric failures: bad parameters, degenerate estimators, failed quadrature.
class NumericError : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public NumericError {
 public:
  OutOfRange(std::string parameter, const std::string& message)
      : NumericError(parameter + ": " + message), parameter_(std::move(parameter)) {}
  const std::string& parameter() const noexcept { return parameter_; }

 private:
  std::string parameter_;
};

#define STABLEINFER_DEFINE_ERROR(Name, Base) \
  class Name : public Base {                 \
   public:                                   \
    using Base::Base;                        \
  };

STABLEINFER_DEFINE_ERROR(ZeroScale, NumericError)
STABLEINFER_DEFINE_ERROR(AlphaMismatch, NumericError)
STABLEINFER_DEFINE_ERROR(QuadratureFailure, NumericError)
STABLEINFER_DEFINE_ERROR(InvalidSpec, NumericError)
STABLEINFER_DEFINE_ERROR(DimensionMismatch, NumericError)
STABLEINFER_DEFINE_ERROR(DivisionByZeroScale, NumericError)
STABLEINFER_DEFINE_ERROR(MomentOrderTooHigh, NumericError)
STABLEINFER_DEFINE_ERROR(InvalidMomentOrder, NumericError)
STABLEINFER_DEFINE_ERROR(MismatchedReference, NumericError)
STABLEINFER_DEFINE_ERROR(DegenerateWeights, NumericError)

/// Configuration problems; carries an optional line number (0 = unknown).
class ConfigParse : public Error {
 public:
  ConfigParse(const std::string& field, const std::string& message, std::size_t line = 0)
      : Error(format(field, message, line)), field_(field), line_(line) {}
  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& field, const std::string& message,
                            std::size_t line) {
    std::string out = "config";
    if (line != 0) out += " line " + std::to_string(line);
    if (!field.empty()) out += " field '" + field + "'";
    return out + ": " + message;
  }
  std::string field_;
  std::size_t line_;
};

STABLEINFER_DEFINE_ERROR(IoFailure, Error)

#undef STABLEINFER_DEFINE_ERROR

}  // namespace stableinfer
