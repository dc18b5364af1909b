#pragma once

#include <stdexcept>
#include <string>

namespace oamcv {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct NonPhysicalCovariance : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

struct UnphysicalSource : Error {
  using Error::Error;
};

struct NotEntangledAtUnity : Error {
  using Error::Error;
};

struct DuplicateCharge : Error {
  using Error::Error;
};

struct MissingCharge : Error {
  using Error::Error;
};

struct DegenerateSubmatrix : Error {
  using Error::Error;
};

struct MissingPair : Error {
  using Error::Error;
};

struct TooFewSamples : Error {
  using Error::Error;
};

struct UnphysicalEstimate : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace oamcv
