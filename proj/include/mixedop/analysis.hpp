#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixedop/field.hpp"
#include "mixedop/operator_system.hpp"
#include "mixedop/spectrum.hpp"

namespace mixedop {

enum class ConstantMethod { eigen, multistart_ascent };

std::string to_string(ConstantMethod m);

struct ConstantEstimate {
  explicit ConstantEstimate(FeField field) : maximizer(std::move(field)) {}

  double value = 0.0;
  FeField maximizer;
  ConstantMethod method = ConstantMethod::eigen;
  /// eigen: relative pencil residual of the maximizer. ascent: relative Riesz gradient norm of log R there.
  double residual = 0.0;
  /// Ascent only: no restart reached the stationarity tolerance.
  bool inconclusive = false;
  int restarts = 0;
  /// Ascent only: restarts whose value is within 1e-8 relative of the best.
  int agreeing_restarts = 0;
  /// Ascent only: interpolation_constant_exact for the same system.
  double cross_check = 0.0;
};

/// Largest eigenvalue of the pencil (S, K): max of u^T S u / u^T K u.
ConstantEstimate embedding_constant(const OperatorSystem& sys);

struct InterpolationOptions {
  int restarts = 64;
  std::uint64_t seed = 0;
  int max_iter = 5000;
  /// Stationarity: Riesz gradient of log R below this (relative).
  double gradient_tol = 1e-7;
};

/// R(u) = u^T S u / ((u^T M u)^(1-s) (u^T (K+M) u)^s).
double interpolation_ratio(const OperatorSystem& sys, const Eigen::VectorXd& u);

/// Maximizes R by projected ascent from seeded random starts (run in parallel); iterates are
/// kept at unit M-norm.
ConstantEstimate interpolation_constant(const OperatorSystem& sys, const InterpolationOptions& opts = {});

/// max over tau > 0 of the top eigenvalue of (S, (1-s) tau^s M + s tau^(s-1) (K+M)), which equals
/// max R by the weighted AM-GM inequality (a one-dimensional search, Brent on log tau).
double interpolation_constant_exact(const OperatorSystem& sys);

struct InequalityAudit {
  int fields = 0;
  int violations = 0;
  /// Largest (lhs - rhs) / rhs seen; negative when every field satisfies the bound.
  double worst_relative = 0.0;
};

/// [u]_s^2 <= C ||u||_X^2 for the eigenfields in `spectrum` and `trials` random fields.
InequalityAudit embedding_audit(const OperatorSystem& sys, double constant, const Spectrum& spectrum, int trials,
                                std::uint64_t seed, double rel_tol = 1e-10);

/// [u]_s^2 <= C ||u||^(2(1-s))_{L2} ||u||^(2s)_{H1} for the same population.
InequalityAudit interpolation_audit(const OperatorSystem& sys, double constant, const Spectrum& spectrum, int trials,
                                    std::uint64_t seed, double rel_tol = 1e-8);

struct YoungSplitRow {
  double epsilon = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  InequalityAudit audit;
};

struct YoungSplitReport {
  double alpha = 0.0;
  double interpolation_constant = 0.0;
  std::vector<YoungSplitRow> rows;
  /// 1 / (2 c1 |alpha|); zero when alpha >= 0.
  double epsilon_star = 0.0;
  double gamma_split = 0.0;
  double gamma_exact = 0.0;
  /// gamma_split >= gamma_exact and, when gamma_exact > 0, gamma_split <= 10 gamma_exact.
  bool consistent = true;
  bool short_circuit = false;
};

/// With c_eps = eps^(-s/(1-s)), c1 = C s and c2 = C ((1-s) c_eps + s eps), checks
/// [u]^2 <= c1 eps ||u||_X^2 + c2 ||u||_L2^2 on `trials` random fields per eps, and the
/// Garding constant gamma_split = |alpha| c2 at eps = 1/(2 c1 |alpha|).
YoungSplitReport young_split_audit(const OperatorSystem& sys, const std::vector<double>& epsilon_grid,
                                   double interpolation_value, int trials = 1000, std::uint64_t seed = 0);

}  // namespace mixedop
