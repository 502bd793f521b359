#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace spincm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad sizes, non-traceless matrices, invalid root subsets.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Point outside the domain of a formula (singular α(q), ξ outside 𝒰, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Evaluation too close to a pole. Carries the nearest singular point.
class PoleError : public DomainError {
 public:
  PoleError(const std::string& what, std::complex<double> nearest)
      : DomainError(what), nearest_(nearest) {}
  std::complex<double> nearest() const { return nearest_; }

 private:
  std::complex<double> nearest_;
};

/// Operation called outside its contract (e.g. r-matrix action off J^{-1}(0)).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A required genericity assumption does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Matrix factorization failed (eigenvalue collision, singular Levi block).
class BreakdownError : public Error {
 public:
  BreakdownError(const std::string& what, double time, double gap)
      : Error(what), time_(time), gap_(gap) {}
  double time() const { return time_; }
  double gap() const { return gap_; }

 private:
  double time_;
  double gap_;
};

/// Internal consistency check tripped; indicates a bug or severe ill-conditioning.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace spincm
