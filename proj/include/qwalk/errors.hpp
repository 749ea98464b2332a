#pragma once

#include <stdexcept>
#include <string>

namespace qwalk {

/// Bad parameters or violated preconditions.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested object exceeds a simulation cap.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// An internal consistency check failed (non-unitary operator, bad oracle...).
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace qwalk
