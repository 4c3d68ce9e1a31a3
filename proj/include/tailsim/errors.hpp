#pragma once

#include <stdexcept>
#include <string>

namespace tailsim {

/// Invalid configuration or precondition violation (bad flags, bad sizes,
/// out-of-range parameters). Maps to CLI exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A coordinate inverse was requested for a coordinate the target does not
/// actually depend on at the probed point (degenerate affine coefficient).
struct CoordinateInactive : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tailsim
