#pragma once

#include <Eigen/Core>

namespace mixedop {

/// Symmetric tridiagonal matrix: diag(i) = A(i,i), off(i) = A(i,i+1) = A(i+1,i).
struct TridiagonalMatrix {
  Eigen::VectorXd diag;
  Eigen::VectorXd off;

  int size() const { return static_cast<int>(diag.size()); }
  double operator()(int i, int j) const;
  Eigen::MatrixXd dense() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  double quadratic(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
  /// Solves A x = rhs by symmetric tridiagonal elimination; throws NumericalError on a
  /// non-positive pivot (the callers only solve with positive-definite matrices).
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
};

}  // namespace mixedop
