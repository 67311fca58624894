#pragma once

#include <functional>

#include <Eigen/Core>

#include "mixedop/mesh.hpp"
#include "mixedop/tridiagonal.hpp"

namespace mixedop {

/// Selects the serial reference loop or the OpenMP loop of a kernel. Both
/// variants compute every entry through the same arithmetic, so their results
/// are bitwise identical.
enum class Execution { serial, parallel };

/// Exact P1 stiffness (1/h) tridiag(-1, 2, -1) of the Dirichlet Laplacian.
TridiagonalMatrix assemble_local_stiffness(const MeshInterval& mesh);

/// Exact P1 mass matrix (h/6) tridiag(1, 4, 1).
TridiagonalMatrix assemble_mass(const MeshInterval& mesh);

/// Weighted mass matrix  int w(x) phi_i phi_j dx  by 4-point Gauss per element.
TridiagonalMatrix assemble_weighted_mass(const MeshInterval& mesh, const std::function<double(double)>& weight);

struct GagliardoOptions {
  Execution execution = Execution::parallel;
  /// Largest accepted quadrature error estimate, relative to the largest diagonal entry.
  double tolerance = 1e-10;
};

/// The Gagliardo form split into its two nonnegative pieces.
///
///   interior(i,j) = int_{Omega x Omega} (phi_i(x)-phi_i(y))(phi_j(x)-phi_j(y)) |x-y|^{-1-2s}
///   exterior(i,j) = 2 int_Omega phi_i phi_j (int_{R \ Omega} |x-y|^{-1-2s} dy) dx
struct GagliardoMatrices {
  Eigen::MatrixXd interior;
  Eigen::MatrixXd exterior;
  /// Largest per-entry quadrature error estimate (absolute).
  double error_estimate = 0.0;

  Eigen::MatrixXd total() const { return interior + exterior; }
};

/// Assembles the Gagliardo matrix of the hat basis with zero exterior extension.
///
/// On a uniform mesh the contribution of an element pair depends only on the
/// gap between the two elements, so one table of local integrals per gap is
/// computed first: coincident elements in closed form, touching elements by a
/// Duffy split at the shared vertex (radial part exact, angular part by
/// Gauss), separated elements by tensor Gauss. Integrals against the tail
/// weights |x-c|^{-2s} are exact on elements touching c and Gauss elsewhere.
/// Every local integral is also evaluated with a 15-point rule to estimate its
/// error; an entry whose estimate exceeds the tolerance raises QuadratureError.
///
/// Throws DomainError unless 0 < s < 1.
GagliardoMatrices assemble_gagliardo_parts(const MeshInterval& mesh, double s, const GagliardoOptions& options = {});

Eigen::MatrixXd assemble_gagliardo(const MeshInterval& mesh, double s, const GagliardoOptions& options = {});

}  // namespace mixedop
