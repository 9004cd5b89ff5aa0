#ifndef SPECSEP_ERRORS_HPP_
#define SPECSEP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace specsep {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model input violates its invariants (bad atoms, y out of range, ...).
class InvalidModel : public Error {
 public:
  using Error::Error;
};

/// Some atom denominator 1 + u g + t s (or a transform denominator) vanished.
class PoleError : public Error {
 public:
  using Error::Error;
};

/// Iterative solve did not reach tolerance.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string &what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

/// Continuation towards the real axis stopped making progress.
class ContinuationStall : public Error {
 public:
  ContinuationStall(const std::string &what, double last_v)
      : Error(what), last_v_(last_v) {}
  double last_v() const { return last_v_; }

 private:
  double last_v_;
};

/// No real root of the s-given-g constraint on the physical branch.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// Gap sweep produced an inconsistent structure; usually fixed by a finer grid.
class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

/// A gap closed, vanished, or could not be matched across a y step.
class GapTrackingError : public Error {
 public:
  using Error::Error;
};

/// h_j(x) + 1 changed sign inside a gap, or x is not in a gap.
class SeparationError : public Error {
 public:
  using Error::Error;
};

}  // namespace specsep

#endif
