#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mixedop/nonlinearity.hpp"
#include "mixedop/operator_system.hpp"

namespace mixedop {

struct GeometryProbe {
  /// Radii tried for the small sphere in P_{k+1}; the one with the largest infimum is kept.
  std::vector<double> rho_grid{2.0, 1.0, 0.5, 0.25, 0.1};
  int starts = 8;
  int max_iter = 400;
  /// Random samples per face of the boundary of Delta before local ascent.
  int boundary_samples = 256;
  /// Relative agreement needed between the best two multistart results.
  double spread_tol = 1e-6;
  double rho_big_max = 1e6;
  std::uint64_t seed = 0;
};

/// linking: superlinear case, Delta = (closed ball of radius rho in H_k) + [0, rho] u_{k+1}.
/// saddle: asymptotically linear case, J bounded below on P_{k+1} and negative far out in H_k.
enum class GeometryMode { linking, saddle };

struct LinkingGeometryReport {
  int k = 0;
  GeometryMode mode = GeometryMode::linking;
  double rho_small = 0.0;     ///< radius of the sphere in P_{k+1}
  double alpha_tilde = 0.0;   ///< inf of J on that sphere
  double rho_big = 0.0;       ///< rho of Delta (linking) or T of the H_k sphere (saddle)
  double boundary_sup = 0.0;  ///< sup of J on the boundary of Delta, or on the H_k sphere
  /// Saddle mode only: inf of J over all of P_{k+1} (-inf when J is unbounded below there).
  std::optional<double> subspace_inf;
  bool certified = false;
  bool inconclusive = false;
  std::string message;
};

struct SphereMinimum {
  double value = 0.0;
  Eigen::VectorXd point;  ///< nodal coefficients, ||point||_X = rho
  int agreeing_starts = 0;
  bool inconclusive = false;
};

/// Multistart Riemannian descent of J over { u = rho Z c : |c| = 1 } where Z is an
/// X-orthonormal basis. Starts: the two signs of the lowest curvature direction of
/// J at 0 inside span(Z), then seeded random directions. Starts run in parallel.
SphereMinimum minimize_on_sphere(const OperatorSystem& sys, const Nonlinearity& nl, const Eigen::MatrixXd& basis,
                                 double rho, const GeometryProbe& probe, std::uint64_t stream, bool maximize = false);

/// Linking mode unless the nonlinearity is AffineLinear, which gets the saddle mode.
/// k = 0 is the mountain-pass geometry (P_1 is the whole space, H_0 = {0}).
LinkingGeometryReport verify_geometry(const OperatorSystem& sys, const Nonlinearity& nl, int k,
                                      const GeometryProbe& probe = {});

LinkingGeometryReport verify_geometry(const OperatorSystem& sys, const Nonlinearity& nl, int k, GeometryMode mode,
                                      const GeometryProbe& probe);

/// min over nonzero u in P_{k+1} of (B(u,u) - int theta_bar u^2) / ||u||_X^2, the smallest
/// eigenvalue of the projected pencil (K + alpha S - M_theta, K).
double coercivity_gap(const OperatorSystem& sys, const std::function<double(double)>& theta_bar, int k);

}  // namespace mixedop
