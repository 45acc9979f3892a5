#pragma once

#include <stdexcept>
#include <string>

namespace kal {

// Bad or inconsistent configuration (exit code 2 at the CLI).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A model hypothesis is violated by construction, e.g. delta2 < delta1.
struct HypothesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// NaN, blow-up, fixed-point failure, oracle instability (exit code 4).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kal
