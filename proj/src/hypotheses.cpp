#include "mixedop/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixedop/error.hpp"

namespace mixedop {

std::vector<double> SampleGrid::t_values() const {
  if (!(t_min > 0.0 && t_max > t_min && count >= 2)) throw DomainError("sample grid needs 0 < t_min < t_max and count >= 2");
  std::vector<double> out;
  out.reserve(2 * static_cast<std::size_t>(count));
  const double lmin = std::log10(t_min);
  const double lmax = std::log10(t_max);
  for (int i = 0; i < count; ++i) {
    const double t = std::pow(10.0, lmin + (lmax - lmin) * i / (count - 1));
    out.push_back(-t);
    out.push_back(t);
  }
  return out;
}

std::string condition_id(Condition c) {
  switch (c) {
    case Condition::linear_growth: return "linear_growth";
    case Condition::vanishes_at_zero: return "vanishes_at_zero";
    case Condition::subcritical_growth: return "subcritical_growth";
    case Condition::superquadratic: return "superquadratic";
    case Condition::slopes_infinity: return "slopes_infinity";
    case Condition::slopes_zero: return "slopes_zero";
    case Condition::potential_above_lambda_k: return "potential_above_lambda_k";
  }
  return "unknown";
}

namespace {

double need(const std::optional<double>& v, const char* name, Condition c) {
  if (!v) throw DomainError("condition " + condition_id(c) + " needs the declared constant '" + name + "'");
  return *v;
}

// Tracks the worst relative violation of lhs <= rhs.
struct Audit {
  HypothesisReport report;
  bool any = false;

  void le(double lhs, double rhs, double x, double t) {
    const double v = (lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
    const double vv = std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    if (!any || vv > report.worst_violation) {
      report.worst_violation = vv;
      report.witness = {x, t};
      any = true;
    }
  }
  HypothesisReport finish(double tol) {
    report.worst_violation = std::max(report.worst_violation, 0.0);
    report.pass = report.worst_violation <= tol;
    return report;
  }
};

HypothesisReport slope_report(const Nonlinearity& nl, Condition c, const SampleGrid& grid) {
  const SlopeEstimate est =
      asymptotic_slopes(nl, c == Condition::slopes_infinity ? SlopeMode::at_infinity : SlopeMode::at_zero, grid);
  HypothesisReport r;
  r.condition = c;
  r.pass = !est.inconclusive;
  r.worst_violation = est.inconclusive ? 1.0 : 0.0;
  r.note = "lower=" + std::to_string(est.lower) + " upper=" + std::to_string(est.upper) +
           (est.divergent ? " divergent" : "") + (est.inconclusive ? " inconclusive" : "");
  return r;
}

}  // namespace

std::vector<Condition> default_conditions(const Nonlinearity& nl) {
  const HypothesisConstants& k = nl.constants();
  if (std::holds_alternative<AffineLinear>(nl.kind())) return {Condition::linear_growth, Condition::slopes_infinity};
  if (std::holds_alternative<PowerPerturbed>(nl.kind())) {
    std::vector<Condition> out{Condition::vanishes_at_zero, Condition::subcritical_growth, Condition::superquadratic, Condition::slopes_zero};
    if (k.lambda_k) out.push_back(Condition::potential_above_lambda_k);
    return out;
  }
  std::vector<Condition> out{Condition::vanishes_at_zero};
  if (k.a_bound && k.b && !k.r) out.push_back(Condition::linear_growth);
  if (k.a_bound && k.b && k.r) out.push_back(Condition::subcritical_growth);
  if (k.mu && k.mu_tilde && k.R && k.c && k.A && k.d) out.push_back(Condition::superquadratic);
  if (k.lambda_k) out.push_back(Condition::potential_above_lambda_k);
  return out;
}

std::vector<HypothesisReport> check_hypotheses(const Nonlinearity& nl, const SampleGrid& grid) {
  return check_hypotheses(nl, grid, default_conditions(nl));
}

std::vector<HypothesisReport> check_hypotheses(const Nonlinearity& nl, const SampleGrid& grid,
                                               const std::vector<Condition>& conditions) {
  const std::vector<double> ts = grid.t_values();
  const HypothesisConstants& k = nl.constants();
  std::vector<HypothesisReport> out;
  for (Condition c : conditions) {
    if (c == Condition::slopes_infinity || c == Condition::slopes_zero) {
      out.push_back(slope_report(nl, c, grid));
      continue;
    }
    Audit audit;
    audit.report.condition = c;
    switch (c) {
      case Condition::linear_growth: {
        const double a = need(k.a_bound, "a_bound", c);
        const double b = need(k.b, "b", c);
        for (double x : grid.x)
          for (double t : ts) audit.le(std::abs(nl.f(x, t)), a + b * std::abs(t), x, t);
        break;
      }
      case Condition::vanishes_at_zero:
        for (double x : grid.x) audit.le(std::abs(nl.f(x, 0.0)), 0.0, x, 0.0);
        break;
      case Condition::subcritical_growth: {
        const double a = need(k.a_bound, "a_bound", c);
        const double b = need(k.b, "b", c);
        const double r = need(k.r, "r", c);
        for (double x : grid.x)
          for (double t : ts) audit.le(std::abs(nl.f(x, t)), a + b * std::pow(std::abs(t), r - 1.0), x, t);
        break;
      }
      case Condition::superquadratic: {
        const double mu = need(k.mu, "mu", c);
        const double mut = need(k.mu_tilde, "mu_tilde", c);
        const double R = need(k.R, "R", c);
        const double cc = need(k.c, "c", c);
        const double A = need(k.A, "A", c);
        const double d = need(k.d, "d", c);
        if (!(mu > 2.0 && mut > 2.0 && R > 0.0 && cc > 0.0 && d >= 0.0)) {
          throw DomainError("superquadratic condition needs mu > 2, mu_tilde > 2, R > 0, c > 0, d >= 0");
        }
        for (double x : grid.x) {
          for (double t : ts) {
            const double F = nl.F(x, t);
            if (std::abs(t) >= R) {
              const double lhs = mu * F - mu * A * t * t / 2.0;
              audit.le(0.0, lhs, x, t);
              audit.le(lhs, nl.f(x, t) * t - A * t * t, x, t);
            }
            audit.le(cc * std::pow(std::abs(t), mut) - d, F, x, t);
          }
        }
        break;
      }
      case Condition::potential_above_lambda_k: {
        const double lk = need(k.lambda_k, "lambda_k", c);
        for (double x : grid.x)
          for (double t : ts) audit.le(lk * t * t / 2.0, nl.F(x, t), x, t);
        break;
      }
      default:
        break;
    }
    out.push_back(audit.finish(grid.tolerance));
  }
  return out;
}

SlopeEstimate asymptotic_slopes(const Nonlinearity& nl, SlopeMode mode, const SampleGrid& grid, double tolerance) {
  if (grid.x.empty()) throw DomainError("slope estimate needs at least one x sample");
  const double span = std::log10(grid.t_max) - std::log10(grid.t_min);
  if (span < 2.0) throw DomainError("slope estimate needs a grid spanning at least two decades");
  // Decade [lo, hi] of |t| nearest the limit, and the one before it.
  const double edge = mode == SlopeMode::at_infinity ? grid.t_max : grid.t_min;
  const double inward = mode == SlopeMode::at_infinity ? 0.1 : 10.0;
  auto range_over = [&](double t0, double t1) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double t : grid.t_values()) {
      const double a = std::abs(t);
      if (a < std::min(t0, t1) * (1 - 1e-12) || a > std::max(t0, t1) * (1 + 1e-12)) continue;
      for (double x : grid.x) {
        const double ratio = nl.f(x, t) / t;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
    }
    return std::pair{lo, hi};
  };
  const auto [lo2, hi2] = range_over(edge, edge * inward);
  const auto [lo1, hi1] = range_over(edge * inward, edge * inward * inward);
  SlopeEstimate est{lo2, hi2, false, false};
  auto diverges = [](double last, double prev) { return std::abs(last) >= 10.0 * std::max(1.0, std::abs(prev)); };
  if (diverges(hi2, hi1) && hi2 > 0) {
    est.upper = std::numeric_limits<double>::infinity();
    est.divergent = true;
  }
  if (diverges(lo2, lo1) && lo2 < 0) {
    est.lower = -std::numeric_limits<double>::infinity();
    est.divergent = true;
  }
  if (diverges(lo2, lo1) && lo2 > 0) {
    est.lower = std::numeric_limits<double>::infinity();
    est.divergent = true;
  }
  if (diverges(hi2, hi1) && hi2 < 0) {
    est.upper = -std::numeric_limits<double>::infinity();
    est.divergent = true;
  }
  if (!est.divergent) {
    const double spread = std::max(std::abs(hi2 - hi1), std::abs(lo2 - lo1)) / std::max(1.0, std::max(std::abs(hi2), std::abs(lo2)));
    est.inconclusive = spread > tolerance;
  }
  return est;
}

}  // namespace mixedop
