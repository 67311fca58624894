#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mixedop/field.hpp"
#include "mixedop/geometry.hpp"
#include "mixedop/nonlinearity.hpp"
#include "mixedop/operator_system.hpp"

namespace mixedop {

struct SolverConfig {
  double tol = 1e-8;
  int max_iter = 2000;
  std::uint64_t seed = 0;
  /// Palais-Smale guard: iterates with ||u||_X above this abort the run.
  double blowup_bound = 1e6;
  /// ||u||_X below nontrivial_factor * rho_small classifies u as trivial (rho_small = 1 without geometry).
  double nontrivial_factor = 1e-4;
  /// Descent hands over to Newton once the dual gradient norm is below this.
  double switch_tol = 1e-4;
  int newton_max_iter = 50;
  int path_nodes = 41;
  GeometryProbe probe;
};

enum class Classification { trivial, nontrivial };

enum class SolverStatus { converged, not_converged, geometry_failed, max_iterations, stagnated, unbounded, diverged };

std::string to_string(Classification c);
std::string to_string(SolverStatus s);

enum class PathPhase { descent, newton };

std::string to_string(PathPhase p);

struct PathRecord {
  int iteration = 0;
  double J = 0.0;
  double grad_norm = 0.0;
  PathPhase phase = PathPhase::newton;
};

struct CriticalPointReport {
  explicit CriticalPointReport(FeField field) : u(std::move(field)) {}

  FeField u;
  double J_value = 0.0;
  /// sqrt(g^T K^{-1} g) with g = J'(u)(phi_i).
  double grad_norm = 0.0;
  double weak_residual = 0.0;
  double x_norm = 0.0;
  Classification classification = Classification::trivial;
  int iterations = 0;
  std::vector<PathRecord> path_history;
  SolverStatus status = SolverStatus::not_converged;
  std::optional<LinkingGeometryReport> geometry;
  std::vector<std::string> notes;

  bool converged() const { return status == SolverStatus::converged; }
};

/// Dual norm of phi -> B(u, phi) - int f(x, u) phi over the discrete space, evaluated
/// through the dense form matrix and a dense Cholesky factor of K (a code path
/// separate from grad_norm, which uses the banded K solve).
double weak_residual(const OperatorSystem& sys, const Nonlinearity& nl, const FeField& u);

/// Report for u with J, both certificates and the classification filled in; status is
/// converged iff grad_norm <= tol and weak_residual <= 10 tol.
CriticalPointReport certify(const OperatorSystem& sys, const Nonlinearity& nl, const FeField& u, double tol,
                            double nontrivial_tol);

/// Resonance guard width 1e-8 (1 + |lambda|).
double resonance_tolerance(double lambda);

/// Solves (K + alpha S - lambda M) u = int a phi_i for a pointwise load a(x) (4-point Gauss per
/// element, the rule of J'). Throws ResonanceError naming k when |lambda - lambda_k| < eig_tol.
CriticalPointReport solve_resolvent(const OperatorSystem& sys, double lambda, const std::function<double(double)>& a,
                                    const SolverConfig& cfg = {});

/// Same with a nodal load field: right-hand side M a.
CriticalPointReport solve_resolvent(const OperatorSystem& sys, double lambda, const FeField& a,
                                    const SolverConfig& cfg = {});

/// Damped Newton on J'(u) = 0 with Jacobian K + alpha S - M_{f'(u)}; backtracking on the
/// dual gradient norm; a Riesz gradient step replaces a failed Jacobian solve.
CriticalPointReport newton_refine(const OperatorSystem& sys, const Nonlinearity& nl, const FeField& u0,
                                  const SolverConfig& cfg = {});

/// Mountain-pass algorithm: a path of cfg.path_nodes fields from 0 to an endpoint with
/// J < 0 along u_1, deformed by steepest descent of its highest node, reparameterized by
/// X-arclength; the highest node is then Newton-refined. Converged iff both certificates
/// hold, u is nontrivial and J(u) > 0.
CriticalPointReport mountain_pass(const OperatorSystem& sys, const Nonlinearity& nl, const SolverConfig& cfg = {});

/// Local minimax over the splitting H_k + P_{k+1}: for v on the unit X-sphere of the
/// X-complement of H_k, p(v) maximizes J on H_k + [0, inf) v; v descends along the Riesz
/// gradient at p(v). The geometry is verified first; k = 0 is the mountain-pass level.
CriticalPointReport linking_search(const OperatorSystem& sys, const Nonlinearity& nl, int k,
                                   const SolverConfig& cfg = {});

}  // namespace mixedop
