#pragma once

#include <stdexcept>
#include <string>

namespace rp {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Grid is empty, not strictly increasing, or does not start at 0.
struct InvalidGridError : Error {
  using Error::Error;
};

/// Vector/matrix/path dimensions are incompatible.
struct DimensionError : Error {
  using Error::Error;
};

/// A variation-index condition fails (Young condition, theta <= 1, p out of range).
struct RegimeError : Error {
  using Error::Error;
};

/// Picard iteration failed to contract after exhausting the split policy.
struct DivergenceError : Error {
  using Error::Error;
};

/// Malformed configuration, spec string, or input file.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace rp
