#pragma once

#include <stdexcept>
#include <string>

namespace polypin {

// Raised when a computation produces NaN/Inf or fails to converge.
// Distinct from std::invalid_argument so callers can map the two to
// different process exit codes.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace polypin
