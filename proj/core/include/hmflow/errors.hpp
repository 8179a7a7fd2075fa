#pragma once

#include <stdexcept>
#include <string>

namespace hmflow {

// Base class for every error raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Chart inversion requested within the pole margin of the excluded point -e3.
struct PoleError : Error {
  using Error::Error;
};

// Rotation or trisection between (nearly) antipodal directions: axis undefined.
struct AntipodalError : Error {
  using Error::Error;
};

// Time step produced a pre-renormalization norm drift above the blowup threshold.
struct StabilityError : Error {
  using Error::Error;
};

// Chart values exceeded the magnitude cap: trajectory drifting toward the pole.
struct ChartBlowupError : Error {
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// Run configuration fails validation.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace hmflow
