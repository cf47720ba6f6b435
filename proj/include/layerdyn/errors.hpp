#pragma once

#include <stdexcept>
#include <string>

namespace layerdyn {

// Invalid input for an operation (inadmissible ratio, malformed layer vector, ...).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical procedure failed to reach its tolerance (quadrature, Newton, blow-up).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration files / CLI arguments.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace layerdyn
