#pragma once

#include <stdexcept>
#include <string>

namespace sshtraj {

// Invalid user input: bad config values, inconsistent sizes, unknown keys.
// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The integrator or a jump update produced an unphysical state (eigenvalues
// of G outside [0,1], NaN, zero-probability jump). Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sshtraj
