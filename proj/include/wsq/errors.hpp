#pragma once

#include <stdexcept>
#include <string>

namespace wsq {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Jacobi sweeps exhausted before the off-diagonal mass fell below tolerance.
class EigenError : public Error {
 public:
  using Error::Error;
};

/// Gram-Schmidt hit a vector already (numerically) in the span of its predecessors.
class RankError : public Error {
 public:
  RankError(const std::string& what, std::size_t index)
      : Error(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// A domain invariant (unit norm, partition of identity, ...) does not hold.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// A precondition of a checked operation is not met.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver ran out of budget without reaching a verdict.
class UndecidedError : public Error {
 public:
  UndecidedError(const std::string& what, double residual, int iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

}  // namespace wsq
