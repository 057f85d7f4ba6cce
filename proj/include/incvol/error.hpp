#pragma once

#include <stdexcept>
#include <string>

namespace incvol {

// Every failure raised by the library derives from Error. The CLI maps the
// concrete type onto an exit code, so pick the narrowest one that applies.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lengths, lags, indices or sample counts outside what an operation accepts.
class SizeError : public Error {
 public:
  using Error::Error;
};

// A value outside its mathematical domain (non-positive price, |omega| >= 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed input files.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A request that would exceed a configured resource bound.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Degenerate regression design.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Inconsistent caller intent: wrong model tag, bad flag combination.
class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Thrown when every optimizer start fails. Carries the best parameters seen
// so callers can still inspect them.
class OptimizationError : public Error {
 public:
  OptimizationError(const std::string& what, double alpha, double omega, double zeta)
      : Error(what), best_alpha(alpha), best_omega(omega), best_zeta(zeta) {}

  double best_alpha;
  double best_omega;
  double best_zeta;
};

}  // namespace incvol
