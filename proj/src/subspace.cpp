#include "mixedop/subspace.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "mixedop/error.hpp"

namespace mixedop {

Eigen::MatrixXd null_space(const Eigen::MatrixXd& c) {
  const Eigen::Index n = c.rows();
  const Eigen::Index m = c.cols();
  if (m == 0) return Eigen::MatrixXd::Identity(n, n);
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(c);
  if (qr.rank() < m) throw NumericalError("constraint columns are numerically dependent");
  const Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(n - m);
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& z, const Eigen::MatrixXd& g) {
  if (z.cols() == 0) return z;
  const Eigen::MatrixXd gram = z.transpose() * g * z;
  const Eigen::LLT<Eigen::MatrixXd> chol(gram);
  if (chol.info() != Eigen::Success) throw NumericalError("Gram matrix of the basis is not positive definite");
  // Z L^{-T}
  return chol.matrixL().solve(z.transpose()).transpose();
}

Eigen::MatrixXd leading_span_basis(const Spectrum& spectrum, const OperatorSystem& sys, int k) {
  if (k < 0 || k > spectrum.count()) throw DomainError("H_k needs eigenpairs up to k");
  return orthonormalize(spectrum.vectors.leftCols(k), sys.stiffness().dense());
}

Eigen::MatrixXd complement_basis(const Spectrum& spectrum, const OperatorSystem& sys, int k, double zero_tol) {
  if (k < 0 || k > spectrum.count()) throw DomainError("P_{k+1} needs eigenpairs up to k");
  for (int j = 1; j <= k; ++j) {
    if (std::abs(spectrum.lambda(j)) < zero_tol) {
      throw ZeroEigenvalueError(j, spectrum.lambda(j),
                                "lambda_" + std::to_string(j) + " is numerically zero; P_" + std::to_string(k + 1) +
                                    " is not determined by B-orthogonality");
    }
  }
  const Eigen::MatrixXd constraints = sys.form_matrix() * spectrum.vectors.leftCols(k);
  return orthonormalize(null_space(constraints), sys.stiffness().dense());
}

Eigen::VectorXd x_normalized(const OperatorSystem& sys, const Eigen::VectorXd& u) {
  const double norm = std::sqrt(sys.stiffness().quadratic(u, u));
  if (!(norm > 0.0)) throw DomainError("cannot normalize the zero field");
  return u / norm;
}

}  // namespace mixedop
