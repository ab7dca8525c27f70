#ifndef ROULEAU_ERRORS_HPP
#define ROULEAU_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rouleau {

// Bad scenario or argument values; maps to exit status 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Integration or fitting failure; maps to exit status 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rouleau

#endif
