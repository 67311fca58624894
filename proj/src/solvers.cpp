#include "mixedop/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "mixedop/error.hpp"
#include "mixedop/functional.hpp"
#include "mixedop/spectrum.hpp"
#include "mixedop/subspace.hpp"

namespace mixedop {

std::string to_string(Classification c) { return c == Classification::trivial ? "trivial" : "nontrivial"; }

std::string to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::not_converged: return "not_converged";
    case SolverStatus::geometry_failed: return "geometry_failed";
    case SolverStatus::max_iterations: return "max_iterations";
    case SolverStatus::stagnated: return "stagnated";
    case SolverStatus::unbounded: return "unbounded";
    case SolverStatus::diverged: return "diverged";
  }
  return "unknown";
}

std::string to_string(PathPhase p) { return p == PathPhase::descent ? "descent" : "newton"; }

double weak_residual(const OperatorSystem& sys, const Nonlinearity& nl, const FeField& u) {
  require_same_mesh(sys.mesh(), u);
  const Eigen::VectorXd g = sys.form_matrix() * u.coeffs() - nonlinear_load(nl, u);
  const Eigen::LLT<Eigen::MatrixXd> chol(sys.stiffness().dense());
  return std::sqrt(std::max(0.0, g.dot(chol.solve(g))));
}

CriticalPointReport certify(const OperatorSystem& sys, const Nonlinearity& nl, const FeField& u, double tol,
                            double nontrivial_tol) {
  CriticalPointReport r(u);
  r.J_value = J_eval(sys, nl, u);
  r.grad_norm = sys.dual_norm(J_gradient_vector(sys, nl, u));
  r.weak_residual = weak_residual(sys, nl, u);
  r.x_norm = std::sqrt(sys.stiffness().quadratic(u.coeffs(), u.coeffs()));
  r.classification = r.x_norm >= nontrivial_tol ? Classification::nontrivial : Classification::trivial;
  r.status = r.grad_norm <= tol && r.weak_residual <= 10.0 * tol ? SolverStatus::converged : SolverStatus::not_converged;
  return r;
}

double resonance_tolerance(double lambda) { return 1e-8 * (1.0 + std::abs(lambda)); }

namespace {

void check_resonance(const OperatorSystem& sys, double lambda) {
  const Eigen::VectorXd values =
      smallest_pencil_eigenpairs(sys.form_matrix(), sys.mass().dense(), sys.dofs()).values;
  const double tol = resonance_tolerance(lambda);
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (std::abs(values[k] - lambda) < tol) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "lambda = " << lambda << " is resonant with lambda_" << k + 1 << " = " << values[k]
          << " (|difference| < " << tol << ")";
      throw ResonanceError(static_cast<int>(k + 1), values[k], msg.str());
    }
  }
}

CriticalPointReport resolvent_with(const OperatorSystem& sys, double lambda, const Nonlinearity& nl,
                                   const SolverConfig& cfg) {
  check_resonance(sys, lambda);
  const FeField zero = FeField::zero(sys.mesh());
  const Eigen::MatrixXd op = sys.form_matrix() - lambda * sys.mass().dense();
  const Eigen::VectorXd rhs = -J_gradient_vector(sys, nl, zero);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(op);
  Eigen::VectorXd u = lu.solve(rhs);
  // One step of iterative refinement against the residual that J' measures.
  u -= lu.solve(J_gradient_vector(sys, nl, FeField(sys.mesh(), u)));
  CriticalPointReport r = certify(sys, nl, FeField(sys.mesh(), u), cfg.tol, cfg.nontrivial_factor);
  r.iterations = 1;
  return r;
}

// X-arclength reparameterization of a path with fixed endpoints.
std::vector<Eigen::VectorXd> reparameterize(const OperatorSystem& sys, const std::vector<Eigen::VectorXd>& path) {
  const std::size_t n = path.size();
  std::vector<double> arc(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    const Eigen::VectorXd d = path[j] - path[j - 1];
    arc[j] = arc[j - 1] + std::sqrt(sys.stiffness().quadratic(d, d));
  }
  std::vector<Eigen::VectorXd> out(n);
  out.front() = path.front();
  out.back() = path.back();
  std::size_t seg = 1;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double target = arc.back() * static_cast<double>(j) / static_cast<double>(n - 1);
    while (seg < n - 1 && arc[seg] < target) ++seg;
    const double len = arc[seg] - arc[seg - 1];
    const double w = len > 0.0 ? (target - arc[seg - 1]) / len : 0.0;
    out[j] = (1.0 - w) * path[seg - 1] + w * path[seg];
  }
  return out;
}

CriticalPointReport finish(CriticalPointReport refined,
                           std::vector<PathRecord> history, int descent_iterations,
                           const LinkingGeometryReport& geometry, std::vector<std::string> notes) {
  for (PathRecord& rec : refined.path_history) rec.iteration += descent_iterations + 1;
  history.insert(history.end(), refined.path_history.begin(), refined.path_history.end());
  refined.path_history = std::move(history);
  refined.iterations += descent_iterations + 1;
  refined.geometry = geometry;
  notes.insert(notes.end(), refined.notes.begin(), refined.notes.end());
  refined.notes = std::move(notes);
  if (refined.status == SolverStatus::converged) {
    if (refined.classification != Classification::nontrivial) {
      refined.status = SolverStatus::not_converged;
      refined.notes.push_back("refinement reached the trivial critical point");
    } else if (!(refined.J_value > 0.0)) {
      refined.status = SolverStatus::not_converged;
      refined.notes.push_back("critical value is not positive");
    }
  }
  return refined;
}

CriticalPointReport geometry_failure(const OperatorSystem& sys, const Nonlinearity& nl, const LinkingGeometryReport& g,
                                     const SolverConfig& cfg) {
  CriticalPointReport r = certify(sys, nl, FeField::zero(sys.mesh()), cfg.tol, 1.0);
  r.status = SolverStatus::geometry_failed;
  r.geometry = g;
  r.notes.push_back("geometry not certified: " + g.message);
  return r;
}

}  // namespace

CriticalPointReport solve_resolvent(const OperatorSystem& sys, double lambda, const std::function<double(double)>& a,
                                    const SolverConfig& cfg) {
  return resolvent_with(sys, lambda, Nonlinearity::affine(lambda, a), cfg);
}

CriticalPointReport solve_resolvent(const OperatorSystem& sys, double lambda, const FeField& a, const SolverConfig& cfg) {
  require_same_mesh(sys.mesh(), a);
  return resolvent_with(sys, lambda, Nonlinearity::affine(lambda, [a](double x) { return a(x); }), cfg);
}

CriticalPointReport newton_refine(const OperatorSystem& sys, const Nonlinearity& nl, const FeField& u0,
                                  const SolverConfig& cfg) {
  require_same_mesh(sys.mesh(), u0);
  const MeshInterval& mesh = sys.mesh();
  Eigen::VectorXd u = u0.coeffs();
  auto grad_at = [&](const Eigen::VectorXd& c) { return J_gradient_vector(sys, nl, FeField(mesh, c)); };
  Eigen::VectorXd g = grad_at(u);
  double gn = sys.dual_norm(g);
  std::vector<PathRecord> history;
  std::vector<std::string> notes;
  SolverStatus status = SolverStatus::not_converged;
  const double target = 1e-2 * cfg.tol;
  int it = 0;
  int fallbacks = 0;
  for (;; ++it) {
    history.push_back({it, J_eval(sys, nl, FeField(mesh, u)), gn});
    if (gn <= target) break;
    if (it >= cfg.newton_max_iter) {
      status = SolverStatus::max_iterations;
      break;
    }
    const Eigen::MatrixXd hess = J_hessian(sys, nl, FeField(mesh, u));
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(hess);
    Eigen::VectorXd step = -lu.solve(g);
    const bool newton_ok = step.allFinite() && (hess * step + g).norm() <= 1e-6 * g.norm();
    if (!newton_ok) {
      step = -sys.stiffness().solve(g);
      ++fallbacks;
    }
    bool accepted = false;
    double t = 1.0;
    for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
      const Eigen::VectorXd trial = u + t * step;
      const Eigen::VectorXd gt = grad_at(trial);
      const double gnt = sys.dual_norm(gt);
      if (std::isfinite(gnt) && gnt < (1.0 - 1e-4 * t) * gn) {
        u = trial;
        g = gt;
        gn = gnt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // At the round-off floor no step can reduce the residual further.
      if (gn > cfg.tol) status = SolverStatus::stagnated;
      break;
    }
    if (std::sqrt(sys.stiffness().quadratic(u, u)) > cfg.blowup_bound) {
      status = SolverStatus::unbounded;
      notes.push_back("||u||_X exceeded blowup_bound during Newton refinement");
      break;
    }
  }
  CriticalPointReport r = certify(sys, nl, FeField(mesh, u), cfg.tol, cfg.nontrivial_factor);
  if (r.status != SolverStatus::converged && status != SolverStatus::not_converged) r.status = status;
  if (status == SolverStatus::unbounded) r.status = status;
  r.iterations = it;
  r.path_history = std::move(history);
  if (fallbacks > 0) notes.push_back("gradient fallback steps: " + std::to_string(fallbacks));
  r.notes = std::move(notes);
  return r;
}

CriticalPointReport mountain_pass(const OperatorSystem& sys, const Nonlinearity& nl, const SolverConfig& cfg) {
  if (cfg.path_nodes < 3) throw DomainError("mountain pass path needs at least 3 nodes");
  const LinkingGeometryReport geometry = verify_geometry(sys, nl, 0, GeometryMode::linking, cfg.probe);
  if (!geometry.certified) return geometry_failure(sys, nl, geometry, cfg);
  const MeshInterval& mesh = sys.mesh();
  const double nontrivial_tol = cfg.nontrivial_factor * geometry.rho_small;
  auto J = [&](const Eigen::VectorXd& c) { return J_eval(sys, nl, FeField(mesh, c)); };

  // Endpoint along the X-normalized first eigenfield.
  const Spectrum spectrum = solve_pencil(sys, 1);
  const Eigen::VectorXd e1 = x_normalized(sys, spectrum.vectors.col(0));
  double t_end = geometry.rho_big;
  while (!(J(t_end * e1) < 0.0) && t_end <= cfg.probe.rho_big_max) t_end *= 2.0;
  if (!(J(t_end * e1) < 0.0)) {
    LinkingGeometryReport g = geometry;
    g.certified = false;
    g.message = "no endpoint with J < 0 along u_1";
    return geometry_failure(sys, nl, g, cfg);
  }

  const int nodes = cfg.path_nodes;
  std::vector<Eigen::VectorXd> path(static_cast<std::size_t>(nodes));
  for (int j = 0; j < nodes; ++j) path[static_cast<std::size_t>(j)] = (t_end * j / (nodes - 1)) * e1;
  std::vector<double> values(path.size());
  for (std::size_t j = 0; j < path.size(); ++j) values[j] = J(path[j]);

  std::vector<PathRecord> history;
  std::vector<std::string> notes;
  double step = 1.0;
  int it = 0;
  std::size_t top = 1;
  bool handed_over = false;
  int resolution_events = 0;
  bool respaced = false;
  constexpr int stall_window = 100;
  constexpr double stall_rtol = 1e-7;
  double best_max = std::numeric_limits<double>::infinity();
  int best_at = 0;
  for (; it < cfg.max_iter; ++it) {
    top = static_cast<std::size_t>(std::max_element(values.begin() + 1, values.end() - 1) - values.begin());
    const Eigen::VectorXd g = J_gradient_vector(sys, nl, FeField(mesh, path[top]));
    const Eigen::VectorXd d = sys.stiffness().solve(g);
    const double gn = std::sqrt(std::max(0.0, g.dot(d)));
    // A respacing step is not a deformation; the iteration after it is left out of the history.
    if (!respaced) history.push_back({it, values[top], gn, PathPhase::descent});
    respaced = false;
    if (gn <= cfg.switch_tol) {
      handed_over = true;
      break;
    }
    // The node maximum sits a discretization gap away from the saddle; once it stops
    // moving Newton takes over.
    if (values[top] < best_max - stall_rtol * std::max(1.0, std::abs(best_max))) {
      best_max = values[top];
      best_at = it;
    }
    if (it - best_at >= stall_window) {
      handed_over = true;
      notes.push_back("path maximum stagnated; handed over to Newton at grad_norm " + std::to_string(gn));
      break;
    }
    if (std::sqrt(sys.stiffness().quadratic(path[top], path[top])) > cfg.blowup_bound) {
      CriticalPointReport r = certify(sys, nl, FeField(mesh, path[top]), cfg.tol, nontrivial_tol);
      r.status = SolverStatus::unbounded;
      r.path_history = history;
      r.iterations = it;
      r.geometry = geometry;
      r.notes.push_back("path maximum left the blowup bound; Palais-Smale boundedness violated along the run");
      return r;
    }
    // Node motion is capped at two local spacings; a deformation counts only if the
    // reparameterized path has no higher node than before.
    const double spacing = std::sqrt(std::max(0.0, (path[top + 1] - path[top - 1]).dot(
                                                       sys.stiffness().apply(path[top + 1] - path[top - 1])))) / 2.0;
    const double d_norm = gn;  // ||K^{-1} g||_X = sqrt(g^T K^{-1} g)
    step = std::min({2.0 * step, 1.0, d_norm > 0.0 ? 2.0 * spacing / d_norm : 1.0});
    const double current_max = values[top];
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt, step *= 0.5) {
      std::vector<Eigen::VectorXd> trial_path = path;
      trial_path[top] = path[top] - step * d;
      const double jt = J(trial_path[top]);
      if (!(jt <= current_max - 1e-4 * step * gn * gn)) continue;
      trial_path = reparameterize(sys, trial_path);
      std::vector<double> trial_values(trial_path.size());
      for (std::size_t j = 0; j < trial_path.size(); ++j) trial_values[j] = J(trial_path[j]);
      if (*std::max_element(trial_values.begin() + 1, trial_values.end() - 1) <= current_max) {
        path = std::move(trial_path);
        values = std::move(trial_values);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // The nodes under-resolve the ridge: respace them along the same polyline.
      std::vector<Eigen::VectorXd> smooth = reparameterize(sys, path);
      std::vector<double> smooth_values(smooth.size());
      for (std::size_t j = 0; j < smooth.size(); ++j) smooth_values[j] = J(smooth[j]);
      double change = 0.0;
      for (std::size_t j = 0; j < smooth.size(); ++j) change = std::max(change, (smooth[j] - path[j]).norm());
      if (change <= 1e-14 * (1.0 + path[top].norm())) {
        notes.push_back("path descent stagnated at iteration " + std::to_string(it));
        break;
      }
      path = std::move(smooth);
      values = std::move(smooth_values);
      ++resolution_events;
      respaced = true;
      step = 1.0;
    }
  }
  if (resolution_events > 0) notes.push_back("path respacing events: " + std::to_string(resolution_events));
  if (!handed_over && it >= cfg.max_iter) notes.push_back("path descent reached max_iter before the switch tolerance");

  SolverConfig newton_cfg = cfg;
  newton_cfg.nontrivial_factor = nontrivial_tol;
  CriticalPointReport refined = newton_refine(sys, nl, FeField(mesh, path[top]), newton_cfg);
  CriticalPointReport out = finish(std::move(refined), std::move(history), it, geometry, std::move(notes));
  if (!handed_over && out.status == SolverStatus::not_converged) {
    out.status = it >= cfg.max_iter ? SolverStatus::max_iterations : SolverStatus::stagnated;
  }
  return out;
}

namespace {

// Maximizer of J on H_k + [0, inf) v, warm-started from coordinates (w, t).
struct Peak {
  Eigen::VectorXd coords;  // (w, t)
  Eigen::VectorXd point;
  double value = 0.0;
  bool ok = false;
};

Peak find_peak(const OperatorSystem& sys, const Nonlinearity& nl, const Eigen::MatrixXd& y, const Eigen::VectorXd& v,
               Eigen::VectorXd coords) {
  const MeshInterval& mesh = sys.mesh();
  const Eigen::Index k = y.cols();
  Eigen::MatrixXd basis(y.rows(), k + 1);
  basis.leftCols(k) = y;
  basis.col(k) = v;
  const Eigen::MatrixXd metric = basis.transpose() * sys.stiffness().dense() * basis;
  const Eigen::LLT<Eigen::MatrixXd> metric_chol(metric);
  auto point_of = [&](const Eigen::VectorXd& c) { return Eigen::VectorXd(basis * c); };
  auto J = [&](const Eigen::VectorXd& c) { return J_eval(sys, nl, FeField(mesh, point_of(c))); };

  if (coords.size() != k + 1 || !(coords[k] > 0.0)) {
    // Ray maximization along v: d/dt J(t v) changes sign from + to -.
    auto slope = [&](double t) { return v.dot(J_gradient_vector(sys, nl, FeField(mesh, t * v))); };
    double lo = 0.0;
    double hi = 1.0;
    while (slope(hi) > 0.0 && hi < 1e8) {
      lo = hi;
      hi *= 2.0;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (slope(mid) > 0.0 ? lo : hi) = mid;
    }
    coords = Eigen::VectorXd::Zero(k + 1);
    coords[k] = 0.5 * (lo + hi);
  }

  double f = J(coords);
  for (int it = 0; it < 100; ++it) {
    const FeField p(mesh, point_of(coords));
    const Eigen::VectorXd grad = basis.transpose() * J_gradient_vector(sys, nl, p);
    const double gnorm = std::sqrt(std::max(0.0, grad.dot(metric_chol.solve(grad))));
    if (gnorm <= 1e-13 * std::max(1.0, std::sqrt(coords.dot(metric * coords)))) break;
    const Eigen::MatrixXd hess = basis.transpose() * J_hessian(sys, nl, p) * basis;
    const Eigen::LLT<Eigen::MatrixXd> neg(-hess);
    Eigen::VectorXd dir = neg.info() == Eigen::Success ? Eigen::VectorXd(neg.solve(grad))
                                                       : Eigen::VectorXd(metric_chol.solve(grad));
    bool accepted = false;
    double t = 1.0;
    for (int bt = 0; bt < 50; ++bt, t *= 0.5) {
      const Eigen::VectorXd trial = coords + t * dir;
      if (!(trial[k] > 0.0)) continue;
      const double ft = J(trial);
      if (ft > f) {
        coords = trial;
        f = ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  Peak out;
  out.coords = coords;
  out.point = point_of(coords);
  out.value = f;
  out.ok = coords[k] > 0.0;
  return out;
}

}  // namespace

CriticalPointReport linking_search(const OperatorSystem& sys, const Nonlinearity& nl, int k, const SolverConfig& cfg) {
  if (k < 0 || k + 1 > sys.dofs()) throw DomainError("linking index k out of range");
  const LinkingGeometryReport geometry = verify_geometry(sys, nl, k, GeometryMode::linking, cfg.probe);
  if (!geometry.certified) return geometry_failure(sys, nl, geometry, cfg);
  const MeshInterval& mesh = sys.mesh();
  const Eigen::MatrixXd kmat = sys.stiffness().dense();
  const double nontrivial_tol = cfg.nontrivial_factor * geometry.rho_small;

  const Spectrum spectrum = solve_pencil(sys, std::min(sys.dofs(), k + 2));
  std::vector<std::string> notes;
  if (const auto lam = nl.linear_coefficient()) {
    if (k >= 1 && std::abs(*lam - spectrum.lambda(k)) < resonance_tolerance(*lam)) {
      notes.push_back("boundary resonance: lambda equals lambda_k within eig_tol");
    }
  }
  const Eigen::MatrixXd y = leading_span_basis(spectrum, sys, k);
  auto complement = [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(x - y * (y.transpose() * (kmat * x))); };
  Eigen::VectorXd v = x_normalized(sys, complement(spectrum.vectors.col(k)));

  Peak peak = find_peak(sys, nl, y, v, Eigen::VectorXd());
  std::vector<PathRecord> history;
  double step = 0.0;
  int it = 0;
  bool handed_over = false;
  for (; it < cfg.max_iter; ++it) {
    const Eigen::VectorXd g = J_gradient_vector(sys, nl, FeField(mesh, peak.point));
    Eigen::VectorXd d = sys.stiffness().solve(g);
    const double gn = std::sqrt(std::max(0.0, g.dot(d)));
    history.push_back({it, peak.value, gn, PathPhase::descent});
    if (gn <= cfg.switch_tol) {
      handed_over = true;
      break;
    }
    if (std::sqrt(peak.point.dot(kmat * peak.point)) > cfg.blowup_bound) {
      CriticalPointReport r = certify(sys, nl, FeField(mesh, peak.point), cfg.tol, nontrivial_tol);
      r.status = SolverStatus::unbounded;
      r.path_history = history;
      r.iterations = it;
      r.geometry = geometry;
      r.notes.push_back("peak left the blowup bound; Palais-Smale boundedness violated along the run");
      return r;
    }
    d = complement(d);
    d -= v.dot(kmat * d) * v;
    const double tpk = peak.coords[k];
    if (step == 0.0) step = 1.0 / tpk;
    step *= 2.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt, step *= 0.5) {
      const Eigen::VectorXd v2 = x_normalized(sys, v - step * d);
      const Peak p2 = find_peak(sys, nl, y, v2, peak.coords);
      if (p2.ok && p2.value <= peak.value - 1e-4 * step * tpk * gn * gn) {
        v = v2;
        peak = p2;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      notes.push_back("minimax descent stagnated at iteration " + std::to_string(it));
      break;
    }
  }
  if (!handed_over && it >= cfg.max_iter) notes.push_back("minimax descent reached max_iter before the switch tolerance");

  SolverConfig newton_cfg = cfg;
  newton_cfg.nontrivial_factor = nontrivial_tol;
  CriticalPointReport refined = newton_refine(sys, nl, FeField(mesh, peak.point), newton_cfg);
  CriticalPointReport out = finish(std::move(refined), std::move(history), it, geometry, std::move(notes));
  if (!handed_over && out.status == SolverStatus::not_converged) {
    out.status = it >= cfg.max_iter ? SolverStatus::max_iterations : SolverStatus::stagnated;
  }
  return out;
}

}  // namespace mixedop
