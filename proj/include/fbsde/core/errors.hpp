#pragma once

#include <stdexcept>
#include <string>

namespace fbsde {

// Bad inputs: shapes, ranges, malformed scenario data.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine could not produce a trustworthy answer
// (loss of definiteness, rank-deficient regression, ...).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a structural contract, e.g. handed over a strategy that
// peeks at information outside its filtration.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace fbsde
