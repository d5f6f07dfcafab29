#pragma once

#include <stdexcept>
#include <string>

namespace orient {

// Malformed or insufficient input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical routine could not produce a valid answer (degenerate
// geometry, divergence, singular systems).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace orient
