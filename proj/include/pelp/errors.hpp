#pragma once

#include <stdexcept>
#include <string>

namespace pelp {

// Bad input data or file formats; maps to CLI exit code 2.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values, divergence, failed numeric contracts; exit code 3.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pelp
