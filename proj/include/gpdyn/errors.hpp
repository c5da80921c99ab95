#pragma once

#include <stdexcept>
#include <string>

namespace gpdyn {

// Raised for invalid user input (configuration, parameters, specs).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a run must abort mid-flight (domain too small, norm drift, ...).
class RuntimeAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Evaluation at the conical intersection, where the mixing angle and the
// derivative couplings are undefined.
class SingularPointError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace gpdyn
