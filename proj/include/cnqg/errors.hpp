#pragma once

#include <stdexcept>
#include <string>

namespace cnqg {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

struct InvalidField : Error {
  using Error::Error;
};
struct HermitianViolation : Error {
  using Error::Error;
};
struct MeanNotZero : Error {
  using Error::Error;
};
struct ArityError : Error {
  using Error::Error;
};
struct InvalidTime : Error {
  using Error::Error;
};
struct NotLocalized : Error {
  using Error::Error;
};
struct UnsupportedOrder : Error {
  using Error::Error;
};
struct TooExpensive : Error {
  using Error::Error;
};
struct SignViolation : Error {
  using Error::Error;
};
struct InvalidExponent : Error {
  using Error::Error;
};
struct InvalidExponents : Error {
  using Error::Error;
};
struct UnderResolved : Error {
  using Error::Error;
};
struct UnderResolvedMollifier : Error {
  using Error::Error;
};
struct InsufficientData : Error {
  using Error::Error;
};
struct StepTooLarge : Error {
  using Error::Error;
};
struct NumericalBlowupError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace cnqg
