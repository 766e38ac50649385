#pragma once

#include <stdexcept>
#include <string>

namespace hswift {

/// Bad user input: invalid parameters, malformed files, inconsistent options.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A floating-point evaluation left the representable range (inf or NaN).
class OverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An adaptive parameter search hit its cap without meeting the tolerance.
class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The damped normal equations could not be solved.
class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hswift
