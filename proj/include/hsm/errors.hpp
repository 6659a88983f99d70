#pragma once

#include <stdexcept>
#include <string>

namespace hsm {

// Dimension mismatches, non-skew matrices and other malformed algebraic data.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Parameters outside the admissible range of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Requests that fall outside what the library constructs.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Inputs that are well formed but carry no usable information.
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hsm
