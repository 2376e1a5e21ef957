#pragma once

#include <stdexcept>
#include <string>

namespace vecchia {

/// Bad user-facing configuration (scheme/ordering mismatch, invalid sizes, ...).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed external input (CSV rows, non-finite values, ...).
struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure (indefinite matrix, near-duplicate locations, ...).
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vecchia
