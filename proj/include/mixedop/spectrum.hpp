#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include <Eigen/Core>

#include "mixedop/field.hpp"
#include "mixedop/mesh.hpp"
#include "mixedop/operator_system.hpp"

namespace mixedop {

/// Eigenpairs of a symmetric-definite pencil (A, B): ascending values, B-orthonormal columns.
struct PencilEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// The `count` algebraically smallest eigenpairs of (A, B) with B symmetric positive
/// definite. Reduces by the Cholesky factor of B, never of A (A may be indefinite).
/// Throws NumericalError when B cannot be factorized.
PencilEigen smallest_pencil_eigenpairs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int count);

struct SpectrumOptions {
  /// Relative residual ||A v - lambda M v|| / ((||A|| + |lambda| ||M||) ||v||) accepted per pair.
  double residual_tol = 1e-8;
  /// Relative gap below which consecutive eigenvalues are treated as one cluster.
  double cluster_tol = 1e-9;
};

/// Leading part of the variational spectrum of B_alpha relative to the L2 pairing.
struct Spectrum {
  Eigen::VectorXd lambdas;  ///< lambda_1 <= ... <= lambda_m
  Eigen::MatrixXd vectors;  ///< column k-1 is the eigenfield u_k, M-orthonormal
  std::optional<int> n0;    ///< first k with lambda_k > 0, if one was computed
  double alpha = 0.0;
  double s = 0.0;
  MeshInterval mesh;

  int count() const { return static_cast<int>(lambdas.size()); }
  double lambda(int k) const { return lambdas[k - 1]; }
  /// 1-based.
  FeField eigenfield(int k) const;
};

/// min(dofs, 12).
int default_eigenpair_count(const OperatorSystem& sys);

/// The m smallest eigenpairs of (K + alpha S) u = lambda M u. Eigenvectors are
/// M-orthonormal; inside clusters of (numerically) repeated eigenvalues they are
/// re-orthonormalized symmetrically in the M inner product and ordered by the
/// index of their dominant coefficient; every vector is signed so its first
/// significant coefficient is positive.
///
/// Throws DomainError unless 1 <= m <= dofs, NumericalError if M does not factor or
/// a residual exceeds options.residual_tol.
Spectrum solve_pencil(const OperatorSystem& sys, int m, const SpectrumOptions& options = {});

/// Smallest eigenvalue lambda_1 of the pencil.
double first_eigenvalue(const OperatorSystem& sys);

struct CharacterizationResult {
  double minimum = 0.0;       ///< min of the Rayleigh quotient over P_k
  double discrepancy = 0.0;   ///< |minimum - lambda_k|
  double stationarity = 0.0;  ///< projected gradient residual of the minimizer, relative
  double random_floor = 0.0;  ///< smallest quotient among the random feasible trials
  Eigen::VectorXd minimizer;  ///< M-normalized
};

/// Recomputes lambda_k as the minimum of u^T(K + alpha S)u over u^T M u = 1 and
/// B-orthogonality to u_1..u_{k-1}, by an eigensolve restricted to a basis of that
/// constraint set. `trials` random feasible fields confirm no quotient falls below it.
///
/// Throws ZeroEigenvalueError when some |lambda_j| < zero_tol for j < k, because
/// B-orthogonality to a zero-eigenvalue field constrains nothing; NumericalError when
/// the constraint matrix is rank deficient.
CharacterizationResult verify_characterization(const Spectrum& spectrum, const OperatorSystem& sys, int k, int trials,
                                               std::uint64_t seed = 0, double zero_tol = 1e-10);

/// Smallest k with lambda_k > 0. Throws NumericalError ("increase m") when none is.
int first_positive_index(const Spectrum& spectrum);

struct BoundCheckReport {
  double upper_violation = 0.0;  ///< max over u in span(u_1..u_k) of B(u,u) - lambda_k, u^T M u = 1
  double lower_violation = 0.0;  ///< max over u in P_{k+1} of lambda_{k+1} - B(u,u), u^T M u = 1
  int trials = 0;
  double max_violation() const { return std::max(upper_violation, lower_violation); }
};

/// Random audit of   B(u,u) <= lambda_k |u|^2  on H_k   and   B(u,u) >= lambda_{k+1} |u|^2  on P_{k+1}.
BoundCheckReport bound_checks(const Spectrum& spectrum, const OperatorSystem& sys, int k, int trials,
                              std::uint64_t seed = 0);

/// Smallest gamma >= 0 with B(u,u) + gamma |u|_{L2}^2 >= 1/2 ||u||_X^2 on the discrete space,
/// i.e. max(0, -lambda_min(K/2 + alpha S, M)).
double garding_constant(const OperatorSystem& sys);

struct ThresholdResult {
  double alpha_star = 0.0;
  std::pair<double, double> bracket;
  double lambda1_at_star = 0.0;
  int iterations = 0;
};

/// Bisection on alpha -> lambda_1(alpha), which is continuous, nondecreasing and concave.
/// `sys` supplies the mesh, s and the assembled matrices; its alpha is ignored.
/// Throws DomainError when lambda_1 does not change sign across the bracket.
ThresholdResult alpha_threshold(const OperatorSystem& sys, std::pair<double, double> bracket, double tol);

ThresholdResult alpha_threshold(const MeshInterval& mesh, double s, std::pair<double, double> bracket, double tol);

}  // namespace mixedop
