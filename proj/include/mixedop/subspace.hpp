#pragma once

#include <Eigen/Core>

#include "mixedop/operator_system.hpp"
#include "mixedop/spectrum.hpp"

namespace mixedop {

/// Euclidean-orthonormal basis of { u : c.col(j)^T u = 0 for all j }. Throws
/// NumericalError when the columns of c are numerically dependent.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& c);

/// Columns of z re-orthonormalized in the inner product g: result^T g result = I.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& z, const Eigen::MatrixXd& g);

/// X-orthonormal basis (Z^T K Z = I) of H_k = span(u_1, ..., u_k); n x k.
Eigen::MatrixXd leading_span_basis(const Spectrum& spectrum, const OperatorSystem& sys, int k);

/// X-orthonormal basis of P_{k+1} = { u : B(u, u_j) = 0, j <= k }; n x (n - k).
/// Throws ZeroEigenvalueError when some |lambda_j| < zero_tol, j <= k.
Eigen::MatrixXd complement_basis(const Spectrum& spectrum, const OperatorSystem& sys, int k, double zero_tol = 1e-10);

/// u / ||u||_X.
Eigen::VectorXd x_normalized(const OperatorSystem& sys, const Eigen::VectorXd& u);

}  // namespace mixedop
