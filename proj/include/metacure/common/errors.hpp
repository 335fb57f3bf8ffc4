#pragma once

#include <stdexcept>

namespace metacure {

// Bad user input: config files, CLI flags, malformed run directories.
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values or other numerical breakdown at runtime.
// The CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace metacure
