#pragma once

#include <stdexcept>
#include <string>

namespace crm {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch, contradictory spec, or other caller error.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The affine subspaces of an instance have no common point.
class EmptyIntersection : public Error {
 public:
  using Error::Error;
};

/// A result that is impossible in exact arithmetic for a valid instance.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// The requested method does not apply to this instance (e.g. DRM with m != 2).
class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Malformed instance file; the message carries line/field context.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed instance file whose contents violate an invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace crm
