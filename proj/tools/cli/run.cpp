#include "cli/run.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <limits>
#include <random>

#include "mixedop/analysis.hpp"
#include "mixedop/assembly.hpp"
#include "mixedop/error.hpp"
#include "mixedop/functional.hpp"
#include "mixedop/geometry.hpp"
#include "mixedop/hypotheses.hpp"
#include "mixedop/matrix_io.hpp"
#include "mixedop/rng.hpp"
#include "mixedop/solvers.hpp"
#include "mixedop/spectrum.hpp"
#include "oracles.hpp"

namespace mixedop::cli {

namespace {

using json = nlohmann::ordered_json;

// Non-finite numbers become null in JSON; keep them visible as strings instead.
json num(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
  std::string note;
  bool skipped = false;
};

struct Checks {
  std::vector<Check> items;

  void le(const std::string& name, double value, double limit, std::string note = "") {
    items.push_back({name, std::isfinite(value) && value <= limit, value, limit, std::move(note), false});
  }
  void ge(const std::string& name, double value, double limit, std::string note = "") {
    items.push_back({name, std::isfinite(value) && value >= limit, value, limit, std::move(note), false});
  }
  void flag(const std::string& name, bool pass, std::string note = "") {
    items.push_back({name, pass, pass ? 1.0 : 0.0, 1.0, std::move(note), false});
  }
  void skip(const std::string& name, std::string note) { items.push_back({name, true, 0.0, 0.0, std::move(note), true}); }

  bool all_pass() const {
    for (const Check& c : items)
      if (!c.pass) return false;
    return true;
  }
  json to_json() const {
    json out = json::array();
    for (const Check& c : items) {
      json j{{"name", c.name}, {"pass", c.pass}, {"value", num(c.value)}, {"limit", num(c.limit)}};
      if (c.skipped) j["skipped"] = true;
      if (!c.note.empty()) j["note"] = c.note;
      out.push_back(j);
    }
    return out;
  }
  CsvTable to_csv() const {
    CsvTable t{{"check", "pass", "value", "limit", "skipped"}, {}};
    for (const Check& c : items) {
      t.add({c.name, c.pass ? "1" : "0", format_number(c.value), format_number(c.limit), c.skipped ? "1" : "0"});
    }
    return t;
  }
};

json header(const std::string& subcommand, const RunConfig& cfg) {
  return json{{"artifact", "mixedop"}, {"version", version()}, {"subcommand", subcommand}, {"config", to_json(cfg)}};
}

json mesh_json(const MeshInterval& mesh) {
  return json{{"a", mesh.a()}, {"b", mesh.b()}, {"n_elem", mesh.n_elem()}, {"h", mesh.h()}};
}

void finish(json& report, Checks& checks, RunResult& out, const std::string& name) {
  out.certified = checks.all_pass();
  report["checks"] = checks.to_json();
  report["certified"] = out.certified;
  out.artifacts.add_json(name, report);
}

int eigenpair_count(const OperatorSystem& sys, const RunConfig& cfg) { return std::min(cfg.eigenpairs, sys.dofs()); }

double resolve_lambda(const OperatorSystem& sys, const RunConfig& cfg) {
  const LambdaSpec& l = cfg.lambda;
  if (l.rule == LambdaSpec::Rule::value) return l.value;
  const Spectrum sp = solve_pencil(sys, std::min(sys.dofs(), l.k + 1));
  if (l.rule == LambdaSpec::Rule::midgap) return 0.5 * (sp.lambda(l.k) + sp.lambda(l.k + 1));
  return sp.lambda(l.k) - 0.5 * std::abs(sp.lambda(l.k));
}

Nonlinearity make_nonlinearity(const RunConfig& cfg, double lambda) {
  if (cfg.kind == "power") return Nonlinearity::power(lambda, cfg.p).with_constants(cfg.constants);
  if (cfg.kind == "affine") {
    const double load = cfg.load;
    return Nonlinearity::affine(lambda, [load](double) { return load; }).with_constants(cfg.constants);
  }
  throw DomainError("nonlinearity.kind must be affine or power for this subcommand");
}

SampleGrid sample_grid(const RunConfig& cfg) {
  SampleGrid g;
  g.t_min = cfg.t_min;
  g.t_max = cfg.t_max;
  g.count = cfg.t_count;
  g.x = cfg.x_samples;
  g.tolerance = cfg.hypothesis_tol;
  return g;
}

// One report per applicable condition; a condition whose constants are missing is listed as not run.
json hypotheses_json(const Nonlinearity& nl, const RunConfig& cfg, std::vector<HypothesisReport>* ran = nullptr) {
  json out = json::array();
  const SampleGrid grid = sample_grid(cfg);
  for (Condition c : default_conditions(nl)) {
    try {
      const HypothesisReport r = check_hypotheses(nl, grid, {c}).front();
      out.push_back(json{{"condition", condition_id(c)},
                         {"pass", r.pass},
                         {"worst_violation", num(r.worst_violation)},
                         {"witness", {num(r.witness.first), num(r.witness.second)}},
                         {"note", r.note}});
      if (ran != nullptr) ran->push_back(r);
    } catch (const DomainError& e) {
      out.push_back(json{{"condition", condition_id(c)}, {"pass", nullptr}, {"note", std::string("not run: ") + e.what()}});
    }
  }
  return out;
}

SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig s;
  s.tol = cfg.tol;
  s.max_iter = cfg.max_iter;
  s.seed = cfg.seed;
  s.blowup_bound = cfg.blowup_bound;
  s.nontrivial_factor = cfg.nontrivial_factor;
  s.switch_tol = cfg.switch_tol;
  s.newton_max_iter = cfg.newton_max_iter;
  s.path_nodes = cfg.path_nodes;
  s.probe.seed = cfg.seed;
  return s;
}

json geometry_json(const LinkingGeometryReport& g) {
  json j{{"k", g.k},
         {"mode", g.mode == GeometryMode::linking ? "linking" : "saddle"},
         {"rho_small", num(g.rho_small)},
         {"alpha_tilde", num(g.alpha_tilde)},
         {"rho_big", num(g.rho_big)},
         {"boundary_sup", num(g.boundary_sup)},
         {"certified", g.certified},
         {"inconclusive", g.inconclusive},
         {"message", g.message}};
  j["subspace_inf"] = g.subspace_inf ? num(*g.subspace_inf) : json(nullptr);
  return j;
}

CsvTable profile_csv(const FeField& u) {
  CsvTable t{{"x", "u"}, {}};
  const MeshInterval& mesh = u.mesh();
  for (int j = 0; j <= mesh.n_elem(); ++j) t.add({format_number(mesh.vertex(j)), format_number(u.vertex_value(j))});
  return t;
}

RunResult solution_run(const std::string& subcommand, const OperatorSystem& sys, const RunConfig& cfg) {
  RunResult out;
  json report = header(subcommand, cfg);
  report["alpha"] = sys.alpha();
  const double lambda = resolve_lambda(sys, cfg);
  report["lambda"] = lambda;
  const SolverConfig scfg = solver_config(cfg);

  std::optional<CriticalPointReport> r;
  if (subcommand == "solve-linear") {
    if (cfg.kind != "affine") throw DomainError("solve-linear needs nonlinearity.kind = affine");
    const double load = cfg.load;
    r = solve_resolvent(sys, lambda, [load](double) { return load; }, scfg);
  } else {
    const Nonlinearity nl = make_nonlinearity(cfg, lambda);
    r = subcommand == "mountain-pass" ? mountain_pass(sys, nl, scfg) : linking_search(sys, nl, cfg.k, scfg);
  }
  const Nonlinearity nl = make_nonlinearity(cfg, lambda);
  report["hypotheses"] = hypotheses_json(nl, cfg);

  json cp{{"J_value", num(r->J_value)},
          {"grad_norm", num(r->grad_norm)},
          {"weak_residual", num(r->weak_residual)},
          {"x_norm", num(r->x_norm)},
          {"classification", to_string(r->classification)},
          {"iterations", r->iterations},
          {"status", to_string(r->status)},
          {"notes", r->notes}};
  cp["geometry"] = r->geometry ? geometry_json(*r->geometry) : json(nullptr);
  report["critical_point"] = cp;

  Checks checks;
  checks.flag("status_converged", r->converged(), to_string(r->status));
  checks.le("grad_norm", r->grad_norm, cfg.tol);
  checks.le("weak_residual", r->weak_residual, 10.0 * cfg.tol);
  if (subcommand != "solve-linear") {
    checks.flag("nontrivial", r->classification == Classification::nontrivial);
    checks.ge("J_positive", r->J_value, std::numeric_limits<double>::min());
  }
  out.artifacts.add_csv("solution.csv", profile_csv(r->u));
  if (!r->path_history.empty()) {
    CsvTable h{{"iteration", "phase", "J", "grad_norm"}, {}};
    for (const PathRecord& p : r->path_history) {
      h.add({std::to_string(p.iteration), to_string(p.phase), format_number(p.J), format_number(p.grad_norm)});
    }
    out.artifacts.add_csv("path_history.csv", h);
  }
  finish(report, checks, out, "report.json");
  return out;
}

RunResult spectrum_run(const OperatorSystem& sys, const RunConfig& cfg) {
  RunResult out;
  json report = header("spectrum", cfg);
  const Spectrum sp = solve_pencil(sys, eigenpair_count(sys, cfg));
  const Eigen::MatrixXd a = sys.form_matrix();
  const Eigen::MatrixXd m = sys.mass().dense();
  const double a_norm = a.norm();
  const double m_norm = m.norm();
  const Eigen::MatrixXd gram_m = sp.vectors.transpose() * m * sp.vectors;
  const Eigen::MatrixXd gram_a = sp.vectors.transpose() * a * sp.vectors;

  CsvTable table{{"k", "lambda", "rayleigh_residual", "m_orth_residual"}, {}};
  double worst_res = 0.0;
  double worst_m = 0.0;
  double worst_b = 0.0;
  json eigen = json::array();
  for (int k = 1; k <= sp.count(); ++k) {
    const Eigen::VectorXd v = sp.vectors.col(k - 1);
    const double lam = sp.lambda(k);
    const double res = (a * v - lam * (m * v)).norm() / ((a_norm + std::abs(lam) * m_norm) * v.norm());
    double morth = 0.0;
    for (int j = 0; j < sp.count(); ++j) {
      morth = std::max(morth, std::abs(gram_m(k - 1, j) - (j == k - 1 ? 1.0 : 0.0)));
      if (j != k - 1) worst_b = std::max(worst_b, std::abs(gram_a(k - 1, j)) / (1.0 + std::abs(lam)));
    }
    worst_res = std::max(worst_res, res);
    worst_m = std::max(worst_m, morth);
    table.add({std::to_string(k), format_number(lam), format_number(res), format_number(morth)});
    eigen.push_back(lam);
  }
  report["alpha"] = sys.alpha();
  report["s"] = sys.s();
  report["mesh"] = mesh_json(sys.mesh());
  report["eigenvalues"] = eigen;
  report["n0"] = sp.n0 ? json(*sp.n0) : json(nullptr);
  report["gamma"] = garding_constant(sys);
  if (sys.alpha() == 0.0) {
    json ref = json::array();
    const double len = sys.mesh().b() - sys.mesh().a();
    for (int k = 1; k <= std::min(5, sp.count()); ++k) {
      const double exact = std::pow(k * M_PI / len, 2);
      ref.push_back(json{{"k", k}, {"reference", exact}, {"relative_error", std::abs(sp.lambda(k) - exact) / exact}});
    }
    report["laplacian_reference"] = ref;
  }
  Checks checks;
  checks.le("rayleigh_residual", worst_res, 1e-8);
  checks.le("m_orthonormality", worst_m, 1e-8);
  checks.le("b_orthogonality", worst_b, 1e-8);
  out.artifacts.add_csv("spectrum.csv", table);
  finish(report, checks, out, "report.json");
  return out;
}

CsvTable audit_row_csv(const std::vector<YoungSplitRow>& rows) {
  CsvTable t{{"epsilon", "c1", "c2", "fields", "violations", "worst_relative"}, {}};
  for (const YoungSplitRow& r : rows) {
    t.add({format_number(r.epsilon), format_number(r.c1), format_number(r.c2), std::to_string(r.audit.fields),
           std::to_string(r.audit.violations), format_number(r.audit.worst_relative)});
  }
  return t;
}

json audit_json(const InequalityAudit& a) {
  return json{{"fields", a.fields}, {"violations", a.violations}, {"worst_relative", num(a.worst_relative)}};
}

struct ConstantsBundle {
  ConstantEstimate embed;
  ConstantEstimate interp;
  InequalityAudit embed_audit;
  InequalityAudit interp_audit;
  YoungSplitReport young;
};

ConstantsBundle compute_constants(const OperatorSystem& sys, const RunConfig& cfg) {
  const Spectrum sp = solve_pencil(sys, eigenpair_count(sys, cfg));
  ConstantEstimate embed = embedding_constant(sys);
  InterpolationOptions io;
  io.restarts = cfg.restarts;
  io.seed = cfg.seed;
  ConstantEstimate interp = interpolation_constant(sys, io);
  const InequalityAudit ea = embedding_audit(sys, embed.value, sp, cfg.audit_trials, cfg.seed);
  const InequalityAudit ia = interpolation_audit(sys, interp.value, sp, cfg.audit_trials, cfg.seed);
  YoungSplitReport young = young_split_audit(sys, cfg.epsilon_grid, interp.value, cfg.audit_trials, cfg.seed);
  return ConstantsBundle{std::move(embed), std::move(interp), ea, ia, std::move(young)};
}

void constants_checks(const ConstantsBundle& c, Checks& checks) {
  checks.le("embedding_audit_violations", c.embed_audit.violations, 0.0);
  checks.flag("interpolation_ascent_stationary", !c.interp.inconclusive);
  checks.le("interpolation_audit_violations", c.interp_audit.violations, 0.0);
  checks.le("interpolation_not_above_exact", c.interp.value, c.interp.cross_check * (1.0 + 1e-8));
  int young_violations = 0;
  for (const YoungSplitRow& r : c.young.rows) young_violations += r.audit.violations;
  checks.le("young_split_violations", young_violations, 0.0);
  checks.flag("young_gamma_consistent", c.young.consistent);
}

RunResult constants_run(const OperatorSystem& sys, const RunConfig& cfg) {
  RunResult out;
  json report = header("constants", cfg);
  const ConstantsBundle c = compute_constants(sys, cfg);
  report["alpha"] = sys.alpha();
  report["C_embed"] = c.embed.value;
  report["C_interp"] = c.interp.value;
  report["C_interp_exact"] = c.interp.cross_check;
  report["gamma_exact"] = c.young.gamma_exact;
  report["gamma_split"] = c.young.gamma_split;
  report["alpha_star_bound"] = -1.0 / c.embed.value;
  report["embedding"] = json{{"method", to_string(c.embed.method)}, {"residual", num(c.embed.residual)},
                             {"audit", audit_json(c.embed_audit)}};
  report["interpolation"] = json{{"method", to_string(c.interp.method)},
                                 {"residual", num(c.interp.residual)},
                                 {"restarts", c.interp.restarts},
                                 {"agreeing_restarts", c.interp.agreeing_restarts},
                                 {"inconclusive", c.interp.inconclusive},
                                 {"audit", audit_json(c.interp_audit)}};
  report["young_split"] = json{{"epsilon_star", c.young.epsilon_star}, {"short_circuit", c.young.short_circuit},
                               {"consistent", c.young.consistent}};
  Checks checks;
  constants_checks(c, checks);
  out.artifacts.add_csv("young_split.csv", audit_row_csv(c.young.rows));
  finish(report, checks, out, "report.json");
  return out;
}

RunResult threshold_run(const OperatorSystem& sys, const RunConfig& cfg) {
  RunResult out;
  json report = header("threshold", cfg);
  const ThresholdResult t = alpha_threshold(sys, {cfg.bracket_lo, cfg.bracket_hi}, cfg.threshold_tol);
  const double c = embedding_constant(sys).value;
  const Spectrum below = solve_pencil(sys.with_alpha(t.alpha_star - 1.0), eigenpair_count(sys, cfg));
  report["alpha_star"] = t.alpha_star;
  report["bracket"] = {t.bracket.first, t.bracket.second};
  report["lambda1_at_star"] = t.lambda1_at_star;
  report["iterations"] = t.iterations;
  report["C_embed"] = c;
  report["alpha_star_bound"] = -1.0 / c;
  report["n0_at_alpha_star_minus_1"] = below.n0 ? json(*below.n0) : json(nullptr);

  CsvTable curve{{"alpha", "lambda_1"}, {}};
  constexpr int kPoints = 21;
  for (int i = 0; i < kPoints; ++i) {
    const double alpha = cfg.bracket_lo + (cfg.bracket_hi - cfg.bracket_lo) * i / (kPoints - 1);
    curve.add({format_number(alpha), format_number(first_eigenvalue(sys.with_alpha(alpha)))});
  }
  Checks checks;
  checks.le("lambda1_at_star", std::abs(t.lambda1_at_star), cfg.threshold_tol);
  checks.le("alpha_star_below_embedding_bound", t.alpha_star, -1.0 / c + 1e-6);
  checks.ge("n0_at_alpha_star_minus_1", below.n0 ? *below.n0 : 0, 2.0,
            below.n0 ? "" : "no positive eigenvalue among the computed pairs");
  out.artifacts.add_csv("threshold_curve.csv", curve);
  finish(report, checks, out, "report.json");
  return out;
}

RunResult dump_run(const OperatorSystem& sys, const RunConfig& cfg) {
  RunResult out;
  json report = header("dump-matrices", cfg);
  auto dense_text = [](const Eigen::MatrixXd& m) {
    std::ostringstream os;
    write_matrix(os, m);
    return os.str();
  };
  auto banded_text = [](const TridiagonalMatrix& m) {
    std::ostringstream os;
    write_matrix(os, m);
    return os.str();
  };
  out.artifacts.add_text("stiffness.txt", banded_text(sys.stiffness()));
  out.artifacts.add_text("mass.txt", banded_text(sys.mass()));
  out.artifacts.add_text("gagliardo.txt", dense_text(sys.gagliardo()));
  out.artifacts.add_text("form.txt", dense_text(sys.form_matrix()));
  report["alpha"] = sys.alpha();
  report["mesh"] = mesh_json(sys.mesh());
  report["files"] = json{{"stiffness.txt", "banded"}, {"mass.txt", "banded"}, {"gagliardo.txt", "dense"},
                         {"form.txt", "dense"}};
  Checks checks;
  checks.flag("written", true);
  finish(report, checks, out, "report.json");
  return out;
}

// Relative error of J_gradient against central differences of J, worst over `fields` random fields.
double gradient_fd_error(const OperatorSystem& sys, const Nonlinearity& nl, int fields, std::uint64_t seed) {
  std::mt19937_64 rng = make_rng(seed, 500);
  std::normal_distribution<double> normal;
  const MeshInterval& mesh = sys.mesh();
  double worst = 0.0;
  for (int f = 0; f < fields; ++f) {
    Eigen::VectorXd u(sys.dofs());
    Eigen::VectorXd v(sys.dofs());
    for (int i = 0; i < u.size(); ++i) {
      u[i] = normal(rng);
      v[i] = normal(rng);
    }
    const double g = J_gradient_vector(sys, nl, FeField(mesh, u)).dot(v);
    const double h = 1e-5;
    auto J = [&](double t) { return J_eval(sys, nl, FeField(mesh, u + t * v)); };
    const double fd = (-J(2 * h) + 8 * J(h) - 8 * J(-h) + J(-2 * h)) / (12 * h);
    worst = std::max(worst, std::abs(fd - g) / std::max(1.0, std::abs(g)));
  }
  return worst;
}

RunResult full_audit_run(const OperatorSystem& sys, const RunConfig& cfg) {
  RunResult out;
  json report = header("full-audit", cfg);
  report["alpha"] = sys.alpha();
  Checks checks;
  const MeshInterval& mesh = sys.mesh();
  const int n = sys.dofs();
  const Eigen::MatrixXd a = sys.form_matrix();
  const Eigen::MatrixXd m = sys.mass().dense();
  const Spectrum full = solve_pencil(sys, n);

  // Pencil eigenvalues against the inertia-bisection oracle.
  const std::vector<double> ref = oracle::pencil_eigenvalues(a, m);
  double pencil_err = 0.0;
  for (int k = 0; k < n; ++k) pencil_err = std::max(pencil_err, std::abs(full.lambdas[k] - ref[static_cast<std::size_t>(k)]));
  checks.le("pencil_vs_inertia_oracle", pencil_err, 1e-8);

  // Gagliardo entries against nested adaptive quadrature (quadratic cost, coarse meshes only).
  if (mesh.n_elem() <= 16) {
    const Eigen::MatrixXd s_ref = oracle::gagliardo_matrix(mesh, sys.s());
    checks.le("gagliardo_vs_quadrature_oracle", (sys.gagliardo() - s_ref).cwiseAbs().maxCoeff(), 1e-6);
  } else {
    checks.skip("gagliardo_vs_quadrature_oracle", "n_elem > 16");
  }
  {
    const GagliardoOptions serial{Execution::serial};
    checks.le("gagliardo_parallel_vs_serial",
              (assemble_gagliardo(mesh, sys.s(), serial) - sys.gagliardo()).cwiseAbs().maxCoeff(), 0.0);
  }

  // Characterization and the two-sided bounds.
  double char_err = 0.0;
  const int kmax = std::min(4, n);
  for (int k = 1; k <= kmax; ++k) {
    try {
      char_err = std::max(char_err, verify_characterization(full, sys, k, 200, cfg.seed).discrepancy);
    } catch (const ZeroEigenvalueError&) {
      checks.skip("characterization_k" + std::to_string(k), "zero eigenvalue below k");
    }
  }
  checks.le("characterization_discrepancy", char_err, 1e-8);
  double bound_err = 0.0;
  for (int k = 1; k < std::min(5, n); ++k) bound_err = std::max(bound_err, bound_checks(full, sys, k, cfg.audit_trials, cfg.seed).max_violation());
  checks.le("eigenvalue_bounds", bound_err, 1e-9);

  // Garding: B(u,u) + gamma |u|^2 >= |u|_X^2 / 2 on random fields.
  {
    const double gamma = garding_constant(sys);
    std::mt19937_64 rng = make_rng(cfg.seed, 600);
    std::normal_distribution<double> normal;
    int violations = 0;
    for (int t = 0; t < cfg.audit_trials; ++t) {
      Eigen::VectorXd u(n);
      for (int i = 0; i < n; ++i) u[i] = normal(rng);
      const double lhs = u.dot(a * u) + gamma * u.dot(m * u);
      const double rhs = 0.5 * sys.stiffness().quadratic(u, u);
      if (lhs < rhs - 1e-10 * std::max(1.0, std::abs(rhs))) ++violations;
    }
    checks.le("garding_violations", violations, 0.0);
  }

  // Resolvent against dense elimination at the gap midpoint above lambda_1.
  if (n >= 2) {
    const double lambda = 0.5 * (full.lambda(1) + full.lambda(2));
    const CriticalPointReport lin = solve_resolvent(sys, lambda, [](double) { return 1.0; });
    const Eigen::VectorXd rhs = nonlinear_load(Nonlinearity::affine(0.0, [](double) { return 1.0; }), FeField::zero(mesh));
    const Eigen::VectorXd ref_u = oracle::dense_solve(a - lambda * m, rhs);
    checks.le("resolvent_vs_dense_oracle", (lin.u.coeffs() - ref_u).cwiseAbs().maxCoeff() / std::max(1.0, ref_u.cwiseAbs().maxCoeff()), 1e-10);
    checks.le("resolvent_weak_residual", lin.weak_residual, 1e-10);
  }

  // Gradient of J against finite differences for both model kinds.
  checks.le("gradient_fd_power", gradient_fd_error(sys, Nonlinearity::power(1.5, 4.0), 20, cfg.seed), 1e-6);
  checks.le("gradient_fd_affine",
            gradient_fd_error(sys, Nonlinearity::affine(2.0, [](double x) { return std::sin(3.0 * x) + 0.5; }), 20, cfg.seed + 1),
            1e-6);

  // Coercivity gap against the multistart oracle.
  if (n >= 3) {
    const int k = 1;
    const double theta = 0.5 * (full.lambda(k) + full.lambda(k + 1));
    const double gap = coercivity_gap(sys, [theta](double) { return theta; }, k);
    const Eigen::MatrixXd constraints = (a * full.vectors.leftCols(k)).transpose();
    const double ref_gap = oracle::multistart_min_quotient(a - theta * m, sys.stiffness().dense(), constraints, 16, cfg.seed);
    checks.le("coercivity_gap_vs_oracle", std::abs(gap - ref_gap), 1e-6 * (1.0 + std::abs(ref_gap)));
    checks.ge("coercivity_gap_positive", gap, std::numeric_limits<double>::min());
  }

  // Constants.
  const ConstantsBundle c = compute_constants(sys, cfg);
  constants_checks(c, checks);
  report["C_embed"] = c.embed.value;
  report["C_interp"] = c.interp.value;
  report["C_interp_exact"] = c.interp.cross_check;

  // Hypotheses of the configured nonlinearity, when one is configured.
  if (cfg.kind != "none") {
    std::vector<HypothesisReport> ran;
    report["hypotheses"] = hypotheses_json(make_nonlinearity(cfg, resolve_lambda(sys, cfg)), cfg, &ran);
    for (const HypothesisReport& r : ran) checks.flag("hypothesis_" + condition_id(r.condition), r.pass, r.note);
  }

  out.artifacts.add_csv("audit.csv", checks.to_csv());
  finish(report, checks, out, "report.json");
  return out;
}

RunResult run_single(const std::string& subcommand, const OperatorSystem& sys, const RunConfig& cfg) {
  if (subcommand == "spectrum") return spectrum_run(sys, cfg);
  if (subcommand == "constants") return constants_run(sys, cfg);
  if (subcommand == "threshold") return threshold_run(sys, cfg);
  if (subcommand == "dump-matrices") return dump_run(sys, cfg);
  if (subcommand == "full-audit") return full_audit_run(sys, cfg);
  return solution_run(subcommand, sys, cfg);
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"spectrum",     "constants", "threshold",     "solve-linear",
                                              "mountain-pass", "linking",  "dump-matrices", "full-audit"};
  return names;
}

RunResult compute(const std::string& subcommand, const RunConfig& cfg) {
  if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end()) {
    throw ConfigError("unknown subcommand '" + subcommand + "'");
  }
  validate(cfg);
  const OperatorSystem base(build_mesh(cfg.a, cfg.b, cfg.n_elem), cfg.alpha.front(), cfg.s);
  // The threshold search scans alpha itself; a grid adds nothing there.
  if (!cfg.is_grid() || subcommand == "threshold") return run_single(subcommand, base, cfg);

  const int count = static_cast<int>(cfg.alpha.size());
  std::vector<RunResult> results(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) {
    try {
      results[static_cast<std::size_t>(i)] = run_single(subcommand, base.with_alpha(cfg.alpha[static_cast<std::size_t>(i)]), cfg);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  RunResult out;
  out.certified = true;
  json summary = header(subcommand, cfg);
  json runs = json::array();
  CsvTable table{{"index", "alpha", "certified", "directory"}, {}};
  for (int i = 0; i < count; ++i) {
    char dir[32];
    std::snprintf(dir, sizeof dir, "alpha_%03d", i);
    RunResult& r = results[static_cast<std::size_t>(i)];
    out.certified = out.certified && r.certified;
    runs.push_back(json{{"index", i}, {"alpha", cfg.alpha[static_cast<std::size_t>(i)]}, {"certified", r.certified}, {"directory", dir}});
    table.add({std::to_string(i), format_number(cfg.alpha[static_cast<std::size_t>(i)]), r.certified ? "1" : "0", dir});
    out.artifacts.nest(dir, std::move(r.artifacts));
  }
  summary["runs"] = runs;
  summary["certified"] = out.certified;
  out.artifacts.add_json("summary.json", summary);
  out.artifacts.add_csv("summary.csv", table);
  return out;
}

int run(const std::string& subcommand, const RunConfig& cfg) {
  auto fail = [&](const char* type, const std::string& message, int code) {
    const json err{{"error", {{"type", type}, {"message", message}, {"subcommand", subcommand}, {"version", version()}}}};
    std::cerr << err.dump() << "\n";
    return code;
  };
  RunResult result;
  try {
    result = compute(subcommand, cfg);
  } catch (const ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const ResonanceError& e) {
    return fail("resonance", e.what(), 3);
  } catch (const DomainError& e) {
    return fail("domain", e.what(), 3);
  } catch (const NumericalError& e) {
    return fail("numerical", e.what(), 3);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 3);
  }
  try {
    commit(result.artifacts, cfg.out_dir);
  } catch (const std::exception& e) {
    return fail("io", e.what(), 3);
  }
  return result.certified ? 0 : 1;
}

}  // namespace mixedop::cli
