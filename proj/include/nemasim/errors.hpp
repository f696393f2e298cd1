#pragma once

#include <stdexcept>
#include <string>

namespace nemasim {

/// Argument outside the domain of a rate or production function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Grid or configuration inconsistency (e.g. h does not divide a_max).
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The total host population dropped below the solver's division guard.
class PopulationFloorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed to converge or bracket.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested computation lies outside the supported regime.
class UnsupportedCaseError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace nemasim
