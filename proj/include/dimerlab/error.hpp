#pragma once

#include <stdexcept>
#include <string>

namespace dimerlab {

// Bad user input: grid sizes, unknown config keys, inconsistent specs.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative kernel did not reach its tolerance.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The physics left its validity region: lost gap, overlapping supports,
// indefinite shifted operator, broken neutral split.
class ValidityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dimerlab
