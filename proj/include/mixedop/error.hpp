#pragma once

#include <stdexcept>
#include <string>

namespace mixedop {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the inputs was violated (bad domain, s outside (0,1), mesh mismatch...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (factorization, misconvergence, residual above tolerance).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public NumericalError {
 public:
  QuadratureError(int row, int col, double estimate, const std::string& what)
      : NumericalError(what), row_(row), col_(col), estimate_(estimate) {}
  int row() const { return row_; }
  int col() const { return col_; }
  double estimate() const { return estimate_; }

 private:
  int row_;
  int col_;
  double estimate_;
};

/// The requested shift sits on (or within tolerance of) a pencil eigenvalue.
class ResonanceError : public DomainError {
 public:
  ResonanceError(int index, double eigenvalue, const std::string& what)
      : DomainError(what), index_(index), eigenvalue_(eigenvalue) {}
  /// 1-based index k of the offending eigenvalue.
  int index() const { return index_; }
  double eigenvalue() const { return eigenvalue_; }

 private:
  int index_;
  double eigenvalue_;
};

/// An eigenvalue within zero_tol of 0 makes B-orthogonality to its eigenfield vacuous.
class ZeroEigenvalueError : public NumericalError {
 public:
  ZeroEigenvalueError(int index, double eigenvalue, const std::string& what)
      : NumericalError(what), index_(index), eigenvalue_(eigenvalue) {}
  int index() const { return index_; }
  double eigenvalue() const { return eigenvalue_; }

 private:
  int index_;
  double eigenvalue_;
};

}  // namespace mixedop
