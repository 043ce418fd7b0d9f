#pragma once

#include <stdexcept>
#include <string>

namespace sigconf {

// Malformed or inconsistent input data (files, streams, dimensions).
// The CLI maps this to exit code 1.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration (bad parameter values, unknown names).
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sigconf
