#include "mixedop/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "mixedop/error.hpp"
#include "mixedop/rng.hpp"

namespace mixedop {

namespace {

TridiagonalMatrix h1_matrix(const OperatorSystem& sys) {
  TridiagonalMatrix h = sys.stiffness();
  h.diag += sys.mass().diag;
  h.off += sys.mass().off;
  return h;
}

double top_pencil_eigenvalue(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return -smallest_pencil_eigenpairs(-a, b, 1).values[0];
}

Eigen::VectorXd random_coeffs(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) c[i] = normal(rng);
  return c;
}

struct AscentRun {
  Eigen::VectorXd u;
  double value = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  bool stationary = false;
};

// log R and its Euclidean gradient.
double log_ratio(const OperatorSystem& sys, const TridiagonalMatrix& h, const Eigen::VectorXd& u,
                 Eigen::VectorXd* grad) {
  const double s = sys.s();
  const Eigen::VectorXd su = sys.gagliardo() * u;
  const Eigen::VectorXd mu = sys.mass().apply(u);
  const Eigen::VectorXd hu = h.apply(u);
  const double qs = u.dot(su);
  const double qm = u.dot(mu);
  const double qh = u.dot(hu);
  if (grad != nullptr) *grad = 2.0 * su / qs - 2.0 * (1.0 - s) * mu / qm - 2.0 * s * hu / qh;
  return std::log(qs) - (1.0 - s) * std::log(qm) - s * std::log(qh);
}

// Polak-Ribiere ascent of log R, preconditioned by H = K + M.
AscentRun ascend(const OperatorSystem& sys, const TridiagonalMatrix& h, Eigen::VectorXd u,
                 const InterpolationOptions& opts) {
  AscentRun run;
  u /= std::sqrt(sys.mass().quadratic(u, u));
  Eigen::VectorXd g;
  double f = log_ratio(sys, h, u, &g);
  Eigen::VectorXd z = h.solve(g);
  Eigen::VectorXd dir = z;
  double gz = g.dot(z);
  double t = 1.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    run.residual = std::sqrt(std::max(0.0, gz * h.quadratic(u, u)));
    if (run.residual <= opts.gradient_tol) {
      run.stationary = true;
      break;
    }
    double slope = g.dot(dir);
    if (!(slope > 0.0)) {
      dir = z;
      slope = gz;
    }
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
      Eigen::VectorXd trial = u + t * dir;
      trial /= std::sqrt(sys.mass().quadratic(trial, trial));
      Eigen::VectorXd gt;
      const double ft = log_ratio(sys, h, trial, &gt);
      if (std::isfinite(ft) && ft >= f + 1e-4 * t * slope) {
        // Normalization rescales the gradient by the same factor as the iterate.
        const Eigen::VectorXd zt = h.solve(gt);
        const double gzt = gt.dot(zt);
        const double beta = std::max(0.0, (gzt - gt.dot(z)) / gz);
        u = std::move(trial);
        g = std::move(gt);
        z = zt;
        gz = gzt;
        dir = z + beta * dir;
        f = ft;
        moved = true;
        break;
      }
    }
    if (!moved) break;
    t *= 2.0;
  }
  run.value = std::exp(f);
  run.u = std::move(u);
  return run;
}

}  // namespace

std::string to_string(ConstantMethod m) { return m == ConstantMethod::eigen ? "eigen" : "multistart-ascent"; }

ConstantEstimate embedding_constant(const OperatorSystem& sys) {
  const Eigen::MatrixXd k = sys.stiffness().dense();
  const PencilEigen top = smallest_pencil_eigenpairs(-sys.gagliardo(), k, 1);
  const double value = -top.values[0];
  Eigen::VectorXd v = top.vectors.col(0);
  v /= std::sqrt(sys.stiffness().quadratic(v, v));
  if (v[v.size() / 2] < 0.0) v = -v;
  ConstantEstimate out(FeField(sys.mesh(), v));
  out.value = value;
  out.method = ConstantMethod::eigen;
  const Eigen::VectorXd r = sys.gagliardo() * v - value * (k * v);
  out.residual = r.norm() / std::max((sys.gagliardo() * v).norm(), std::numeric_limits<double>::min());
  return out;
}

double interpolation_ratio(const OperatorSystem& sys, const Eigen::VectorXd& u) {
  if (!(sys.s() > 0.0 && sys.s() < 1.0)) throw DomainError("interpolation ratio needs 0 < s < 1");
  const double s = sys.s();
  const double qs = u.dot(sys.gagliardo() * u);
  const double qm = sys.mass().quadratic(u, u);
  const double qh = qm + sys.stiffness().quadratic(u, u);
  if (!(qm > 0.0)) throw DomainError("interpolation ratio of the zero field");
  return qs / (std::pow(qm, 1.0 - s) * std::pow(qh, s));
}

ConstantEstimate interpolation_constant(const OperatorSystem& sys, const InterpolationOptions& opts) {
  if (!(sys.s() > 0.0 && sys.s() < 1.0)) throw DomainError("interpolation constant needs 0 < s < 1");
  if (opts.restarts < 1) throw DomainError("interpolation constant needs at least one restart");
  const TridiagonalMatrix h = h1_matrix(sys);
  const int n = sys.dofs();
  std::vector<AscentRun> runs(static_cast<std::size_t>(opts.restarts));

#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < opts.restarts; ++r) {
    std::mt19937_64 rng = make_rng(opts.seed, 100 + static_cast<std::uint64_t>(r));
    // Even restarts start from white noise, odd ones from its H^{-1} smoothing.
    const Eigen::VectorXd noise = random_coeffs(n, rng);
    runs[static_cast<std::size_t>(r)] = ascend(sys, h, r % 2 == 0 ? noise : h.solve(noise), opts);
  }

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].value > runs[best].value) best = r;
  }
  Eigen::VectorXd u = runs[best].u;
  if (u[n / 2] < 0.0) u = -u;
  ConstantEstimate out(FeField(sys.mesh(), u));
  out.value = runs[best].value;
  out.method = ConstantMethod::multistart_ascent;
  out.residual = runs[best].residual;
  out.restarts = opts.restarts;
  out.inconclusive = std::none_of(runs.begin(), runs.end(), [](const AscentRun& a) { return a.stationary; });
  out.agreeing_restarts = static_cast<int>(std::count_if(runs.begin(), runs.end(), [&](const AscentRun& a) {
    return a.value >= out.value * (1.0 - 1e-8);
  }));
  out.cross_check = interpolation_constant_exact(sys);
  return out;
}

double interpolation_constant_exact(const OperatorSystem& sys) {
  if (!(sys.s() > 0.0 && sys.s() < 1.0)) throw DomainError("interpolation constant needs 0 < s < 1");
  const double s = sys.s();
  const Eigen::MatrixXd m = sys.mass().dense();
  const Eigen::MatrixXd h = h1_matrix(sys).dense();
  // a^(1-s) b^s = min over tau of (1-s) tau^s a + s tau^(s-1) b, attained at tau = b / a.
  auto mu = [&](double log_tau) {
    const double tau = std::exp(log_tau);
    return top_pencil_eigenvalue(sys.gagliardo(), (1.0 - s) * std::pow(tau, s) * m + s * std::pow(tau, s - 1.0) * h);
  };
  // b / a ranges over the spectrum of (H, M): from about 1 + pi^2 / L^2 to 12 / h^2.
  const double lo = std::log(top_pencil_eigenvalue(-h, m) * -1.0) - 1.0;
  const double hi = std::log(top_pencil_eigenvalue(h, m)) + 1.0;
  constexpr int kScan = 48;
  int best = 0;
  std::vector<double> values(kScan + 1);
  for (int i = 0; i <= kScan; ++i) {
    values[static_cast<std::size_t>(i)] = mu(lo + (hi - lo) * i / kScan);
    if (values[static_cast<std::size_t>(i)] > values[static_cast<std::size_t>(best)]) best = i;
  }
  const double a = lo + (hi - lo) * std::max(0, best - 1) / kScan;
  const double b = lo + (hi - lo) * std::min(kScan, best + 1) / kScan;
  const auto r = boost::math::tools::brent_find_minima([&](double x) { return -mu(x); }, a, b, 40);
  return std::max(-r.second, values[static_cast<std::size_t>(best)]);
}

namespace {

template <class Bound>
InequalityAudit run_audit(const OperatorSystem& sys, const Eigen::MatrixXd& fixed, int trials, std::uint64_t seed,
                          double rel_tol, Bound bound) {
  InequalityAudit audit;
  audit.worst_relative = -std::numeric_limits<double>::infinity();
  auto check = [&](const Eigen::VectorXd& u) {
    const double lhs = u.dot(sys.gagliardo() * u);
    const double rhs = bound(u);
    const double rel = (lhs - rhs) / std::max(rhs, std::numeric_limits<double>::min());
    audit.worst_relative = std::max(audit.worst_relative, rel);
    if (rel > rel_tol) ++audit.violations;
    ++audit.fields;
  };
  for (Eigen::Index k = 0; k < fixed.cols(); ++k) check(fixed.col(k));
  std::mt19937_64 rng = make_rng(seed, 300);
  for (int t = 0; t < trials; ++t) check(random_coeffs(sys.dofs(), rng));
  return audit;
}

}  // namespace

InequalityAudit embedding_audit(const OperatorSystem& sys, double constant, const Spectrum& spectrum, int trials,
                                std::uint64_t seed, double rel_tol) {
  return run_audit(sys, spectrum.vectors, trials, seed, rel_tol,
                   [&](const Eigen::VectorXd& u) { return constant * sys.stiffness().quadratic(u, u); });
}

InequalityAudit interpolation_audit(const OperatorSystem& sys, double constant, const Spectrum& spectrum, int trials,
                                    std::uint64_t seed, double rel_tol) {
  const double s = sys.s();
  return run_audit(sys, spectrum.vectors, trials, seed, rel_tol, [&](const Eigen::VectorXd& u) {
    const double qm = sys.mass().quadratic(u, u);
    const double qh = qm + sys.stiffness().quadratic(u, u);
    return constant * std::pow(qm, 1.0 - s) * std::pow(qh, s);
  });
}

YoungSplitReport young_split_audit(const OperatorSystem& sys, const std::vector<double>& epsilon_grid,
                                   double interpolation_value, int trials, std::uint64_t seed) {
  if (!(sys.s() > 0.0 && sys.s() < 1.0)) throw DomainError("Young split needs 0 < s < 1");
  if (!(interpolation_value > 0.0)) throw DomainError("Young split needs a positive interpolation constant");
  const double s = sys.s();
  const double c = interpolation_value;
  auto c2_of = [&](double eps) { return c * ((1.0 - s) * std::pow(eps, -s / (1.0 - s)) + s * eps); };

  YoungSplitReport rep;
  rep.alpha = sys.alpha();
  rep.interpolation_constant = c;
  const Eigen::MatrixXd none(sys.dofs(), 0);
  for (double eps : epsilon_grid) {
    if (!(eps > 0.0)) throw DomainError("Young split epsilon must be positive");
    YoungSplitRow row;
    row.epsilon = eps;
    row.c1 = c * s;
    row.c2 = c2_of(eps);
    row.audit = run_audit(sys, none, trials, seed, 1e-10, [&](const Eigen::VectorXd& u) {
      return row.c1 * eps * sys.stiffness().quadratic(u, u) + row.c2 * sys.mass().quadratic(u, u);
    });
    rep.rows.push_back(row);
  }

  rep.gamma_exact = garding_constant(sys);
  if (sys.alpha() >= 0.0) {
    rep.short_circuit = true;
    rep.consistent = rep.gamma_exact == 0.0;
    return rep;
  }
  const double abs_alpha = -sys.alpha();
  rep.epsilon_star = 1.0 / (2.0 * c * s * abs_alpha);
  rep.gamma_split = abs_alpha * c2_of(rep.epsilon_star);
  const double slack = 1e-9 * (1.0 + rep.gamma_exact);
  rep.consistent = rep.gamma_split >= rep.gamma_exact - slack &&
                   (rep.gamma_exact <= slack || rep.gamma_split <= 10.0 * rep.gamma_exact);
  return rep;
}

}  // namespace mixedop
