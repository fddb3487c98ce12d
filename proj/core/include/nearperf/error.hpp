#pragma once

#include <stdexcept>
#include <string>

namespace nearperf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold for the input.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A construction left the class of rationally representable mixed modules.
class OutOfClassError : public Error {
 public:
  using Error::Error;
};

/// An internal certificate failed. For valid input this indicates a bug.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Arithmetic exceeded the configured big-integer size cap.
class BitLimitExceeded : public Error {
 public:
  using Error::Error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

inline void ensure(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

}  // namespace nearperf
