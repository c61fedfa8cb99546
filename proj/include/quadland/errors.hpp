#pragma once

#include <stdexcept>
#include <string>

namespace quadland {

// Bad dimensions, non-positive weights, rank-deficient teachers and the like.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A coordinate law with Var(X^2) = 0; every barrier constant vanishes.
class DegenerateDistribution : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NonFinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A guarantee the code relies on was observed to fail at runtime.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NoNullDirection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IllPosed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace quadland
