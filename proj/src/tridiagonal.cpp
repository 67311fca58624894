#include "mixedop/tridiagonal.hpp"

#include <cstdlib>

#include "mixedop/error.hpp"

namespace mixedop {

double TridiagonalMatrix::operator()(int i, int j) const {
  if (i == j) return diag[i];
  if (std::abs(i - j) == 1) return off[std::min(i, j)];
  return 0.0;
}

Eigen::MatrixXd TridiagonalMatrix::dense() const {
  const int n = size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = diag[i];
    if (i + 1 < n) {
      a(i, i + 1) = off[i];
      a(i + 1, i) = off[i];
    }
  }
  return a;
}

Eigen::VectorXd TridiagonalMatrix::apply(const Eigen::VectorXd& x) const {
  const int n = size();
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double acc = diag[i] * x[i];
    if (i > 0) acc += off[i - 1] * x[i - 1];
    if (i + 1 < n) acc += off[i] * x[i + 1];
    y[i] = acc;
  }
  return y;
}

double TridiagonalMatrix::quadratic(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  return u.dot(apply(v));
}

Eigen::VectorXd TridiagonalMatrix::solve(const Eigen::VectorXd& rhs) const {
  const int n = size();
  Eigen::VectorXd d(n);
  Eigen::VectorXd y(n);
  // LDL^T with unit lower bidiagonal L.
  for (int i = 0; i < n; ++i) {
    const double l = i > 0 ? off[i - 1] / d[i - 1] : 0.0;
    d[i] = diag[i] - (i > 0 ? l * off[i - 1] : 0.0);
    if (!(d[i] > 0.0)) throw NumericalError("tridiagonal solve: non-positive pivot");
    y[i] = rhs[i] - (i > 0 ? l * y[i - 1] : 0.0);
  }
  Eigen::VectorXd x(n);
  for (int i = n - 1; i >= 0; --i) {
    x[i] = y[i] / d[i] - (i + 1 < n ? off[i] / d[i] * x[i + 1] : 0.0);
  }
  return x;
}

}  // namespace mixedop
