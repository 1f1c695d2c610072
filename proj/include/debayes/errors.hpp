#pragma once

#include <stdexcept>
#include <string>

namespace debayes {

// Error taxonomy mirrored by the CLI exit codes: config -> 1, data -> 2,
// numerical -> 3.

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace debayes
