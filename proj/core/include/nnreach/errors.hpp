#pragma once

#include <stdexcept>
#include <string>

namespace nnreach {

// Malformed or inconsistent input files (scene, model, bounds, tube manifests).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN/Inf in a computation, CFL violations, divergent training.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nnreach
