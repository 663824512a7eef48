#pragma once

#include <stdexcept>
#include <string>

namespace bgm {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scale parameter sigma was zero, negative, or non-finite.
class NonPositiveSigmaError : public Error {
 public:
  using Error::Error;
};

/// A probability argument fell outside [0, 1].
class OutOfRangeUError : public Error {
 public:
  using Error::Error;
};

/// A query value to be released lies outside the output domain.
class QueryValueOutsideDomainError : public Error {
 public:
  using Error::Error;
};

/// epsilon - ln(DeltaC(sigma)) <= 0: sigma is below the feasible region.
class DenominatorNotPositiveError : public Error {
 public:
  using Error::Error;
};

/// The calibration bracket was infeasible where theory says it cannot be.
/// Signals a numerics bug, not bad input.
class InternalBracketError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver exhausted its iteration budget.
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

/// An exhaustive grid operation was requested above its dimension cap.
class DimensionTooLargeError : public Error {
 public:
  using Error::Error;
};

/// A node index fell outside [0, node_count).
class NodeOutOfRangeError : public Error {
 public:
  using Error::Error;
};

}  // namespace bgm
