// errors.hpp - exception types shared across the library.

#pragma once

#include <stdexcept>
#include <string>

namespace dualprobe {

/// Inputs lie outside the parameter regime an operation is defined for
/// (e.g. a closed form requested off resonance, a strong-decoherence formula
/// evaluated below threshold). The CLI maps this to exit code 3.
class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure did not reach its convergence criterion.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dualprobe
