#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mixedop/nonlinearity.hpp"

namespace mixedop {

/// Sampling grid for the audits: |t| log-spaced in [t_min, t_max] with both signs.
struct SampleGrid {
  double t_min = 1e-6;
  double t_max = 1e6;
  int count = 200;
  std::vector<double> x{0.5};
  /// Accepted relative violation.
  double tolerance = 1e-9;

  std::vector<double> t_values() const;
};

enum class Condition {
  linear_growth,             ///< |f| <= a + b|t|
  vanishes_at_zero,          ///< f(x, 0) = 0
  subcritical_growth,        ///< |f| <= a + b|t|^(r-1)
  superquadratic,            ///< growth of F - A t^2/2 beyond R, and F >= c|t|^mu_tilde - d
  slopes_infinity,
  slopes_zero,
  potential_above_lambda_k,  ///< F >= lambda_k t^2 / 2
};

std::string condition_id(Condition c);

struct HypothesisReport {
  Condition condition = Condition::linear_growth;
  bool pass = false;
  /// Largest relative violation (lhs - rhs) / max(1, |lhs|, |rhs|) over the samples; 0 if none.
  double worst_violation = 0.0;
  std::pair<double, double> witness{0.0, 0.0};  ///< (x, t) of the worst sample
  std::string note;
};

/// Conditions that apply to the kind: affine -> linear_growth, slopes_infinity;
/// power -> vanishes_at_zero, subcritical_growth, superquadratic, slopes_zero, and
/// potential_above_lambda_k when lambda_k is declared; custom -> those whose constants are declared.
std::vector<Condition> default_conditions(const Nonlinearity& nl);

/// Sampled audit of each requested condition. The conditions are analytic and
/// can only be falsified here, never proved. Throws DomainError when a
/// requested condition lacks its declared constants.
std::vector<HypothesisReport> check_hypotheses(const Nonlinearity& nl, const SampleGrid& grid,
                                               const std::vector<Condition>& conditions);

std::vector<HypothesisReport> check_hypotheses(const Nonlinearity& nl, const SampleGrid& grid);

enum class SlopeMode { at_infinity, at_zero };

struct SlopeEstimate {
  double lower = 0.0;  ///< +-infinity when divergent
  double upper = 0.0;
  bool divergent = false;
  bool inconclusive = false;
};

/// Estimates liminf / limsup of f(x, t)/t from the extreme decade of the grid
/// (|t| near t_max or near t_min), over every sample x. A ratio that grows by a
/// factor of ten or more across the last two decades is reported as divergent
/// with an infinite sentinel; otherwise a spread between the last two decades
/// above `tolerance` (relative) sets the inconclusive flag.
SlopeEstimate asymptotic_slopes(const Nonlinearity& nl, SlopeMode mode, const SampleGrid& grid, double tolerance = 1e-3);

}  // namespace mixedop
