#pragma once

#include <stdexcept>
#include <string>

namespace rndrace {

/// Malformed or out-of-range input (bad parameter value, missing field).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A function was evaluated outside the interval on which it is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The parameters violate a modelling assumption the requested computation
/// depends on (e.g. staying is unprofitable from the start).
class AssumptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed (bracket lost, quadrature did not converge).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rndrace
