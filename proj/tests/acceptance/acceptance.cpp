// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "mixedop/analysis.hpp"
#include "mixedop/assembly.hpp"
#include "mixedop/error.hpp"
#include "mixedop/functional.hpp"
#include "mixedop/geometry.hpp"
#include "mixedop/rng.hpp"
#include "mixedop/solvers.hpp"
#include "mixedop/spectrum.hpp"
#include "oracles.hpp"

using namespace mixedop;

namespace {

struct Line {
  int id;
  std::string title;
  bool pass;
  std::string detail;
};

std::vector<Line> lines;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void record(int id, const std::string& title, bool pass, const std::string& detail) {
  lines.push_back({id, title, pass, detail});
  std::printf("%s [%2d] %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
}

// Runs one criterion, turning any exception into a FAIL with its message.
void criterion(int id, const std::string& title, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [pass, detail] = body();
    record(id, title, pass, detail);
  } catch (const std::exception& e) {
    record(id, title, false, std::string("exception: ") + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double fd_gradient_error(const OperatorSystem& sys, const Nonlinearity& nl, int fields, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int f = 0; f < fields; ++f) {
    Eigen::VectorXd u(sys.dofs());
    Eigen::VectorXd v(sys.dofs());
    for (int i = 0; i < sys.dofs(); ++i) {
      u[i] = normal(rng);
      v[i] = normal(rng);
    }
    auto J = [&](double t) { return J_eval(sys, nl, FeField(sys.mesh(), u + t * v)); };
    const double h = 1e-5;
    const double fd = (J(-2 * h) - 8 * J(-h) + 8 * J(h) - J(2 * h)) / (12 * h);
    const double g = J_gradient_vector(sys, nl, FeField(sys.mesh(), u)).dot(v);
    worst = std::max(worst, std::abs(fd - g) / std::max(1.0, std::abs(g)));
  }
  return worst;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[std::filesystem::relative(e.path(), dir).string()] = slurp(e.path());
  return files;
}

}  // namespace

int main() {
  const double len = 1.0;

  criterion(1, "analytic baseline", [&] {
    const OperatorSystem sys(build_mesh(0.0, len, 512), 0.0, 0.5);
    const Spectrum sp = solve_pencil(sys, 5);
    double worst = 0.0;
    for (int k = 1; k <= 5; ++k) {
      const double exact = std::pow(k * M_PI / len, 2);
      worst = std::max(worst, std::abs(sp.lambda(k) - exact) / exact);
    }
    return std::pair{worst <= 5e-3, "max relative error " + fmt(worst) + " (limit 5e-3)"};
  });

  criterion(2, "oracle spectrum", [&] {
    const MeshInterval mesh = build_mesh(0.0, len, 8);
    double worst = 0.0;
    for (double alpha : {-10.0, -1.0, 0.0, 1.0}) {
      const OperatorSystem sys(mesh, alpha, 0.5);
      const Spectrum sp = solve_pencil(sys, sys.dofs());
      const std::vector<double> ref = oracle::pencil_eigenvalues(sys.form_matrix(), sys.mass().dense());
      for (int k = 1; k <= sys.dofs(); ++k) worst = std::max(worst, std::abs(sp.lambda(k) - ref[k - 1]));
    }
    return std::pair{worst <= 1e-8, "max absolute error " + fmt(worst) + " (limit 1e-8)"};
  });

  criterion(3, "eigenpair invariants", [&] {
    double orth = 0.0;
    double rayleigh = 0.0;
    double charac = 0.0;
    for (double alpha : {0.0, -5.0}) {
      const OperatorSystem sys(build_mesh(0.0, len, 64), alpha, 0.5);
      const Spectrum sp = solve_pencil(sys, 12);
      const Eigen::MatrixXd a = sys.form_matrix();
      const Eigen::MatrixXd m = sys.mass().dense();
      const Eigen::MatrixXd gm = sp.vectors.transpose() * m * sp.vectors;
      const Eigen::MatrixXd ga = sp.vectors.transpose() * a * sp.vectors;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(gm.rows(), gm.cols());
      orth = std::max(orth, (gm - eye).cwiseAbs().maxCoeff());
      const Eigen::MatrixXd off = ga - Eigen::MatrixXd(ga.diagonal().asDiagonal());
      orth = std::max(orth, off.cwiseAbs().maxCoeff() / (1.0 + ga.diagonal().cwiseAbs().maxCoeff()));
      for (int k = 1; k <= sp.count(); ++k) {
        const Eigen::VectorXd v = sp.vectors.col(k - 1);
        rayleigh = std::max(rayleigh, std::abs(v.dot(a * v) / v.dot(m * v) - sp.lambda(k)) / (1.0 + std::abs(sp.lambda(k))));
      }
      for (int k = 1; k <= 4; ++k) charac = std::max(charac, verify_characterization(sp, sys, k, 200, 11).discrepancy);
    }
    const bool ok = orth <= 1e-8 && rayleigh <= 1e-8 && charac <= 1e-8;
    return std::pair{ok, "orthogonality " + fmt(orth) + ", Rayleigh " + fmt(rayleigh) + ", characterization " + fmt(charac) +
                             " (limit 1e-8 each)"};
  });

  criterion(4, "two-sided eigenvalue bounds", [&] {
    const OperatorSystem sys(build_mesh(0.0, len, 64), -5.0, 0.5);
    const Spectrum sp = solve_pencil(sys, 8);
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 6; ++k) worst = std::max(worst, bound_checks(sp, sys, k, 1000, 21).max_violation());
    return std::pair{worst <= 1e-9, "max violation " + fmt(worst) + " over k = 1..6, 1000 fields per side (limit 1e-9)"};
  });

  criterion(5, "indefinite regime", [&] {
    const OperatorSystem sys(build_mesh(0.0, len, 256), 0.0, 0.5);
    const ThresholdResult t = alpha_threshold(sys, {-10.0, 0.0}, 1e-10);
    const double c = embedding_constant(sys).value;
    const Spectrum below = solve_pencil(sys.with_alpha(t.alpha_star - 1.0), 12);
    const int n0 = below.n0 ? *below.n0 : 0;
    const bool ok = std::abs(t.lambda1_at_star) <= 1e-6 && t.alpha_star <= -1.0 / c + 1e-6 && n0 >= 2;
    return std::pair{ok, "alpha* " + fmt(t.alpha_star) + ", |lambda_1(alpha*)| " + fmt(std::abs(t.lambda1_at_star)) +
                             ", -1/C_h " + fmt(-1.0 / c) + ", N0(alpha*-1) " + std::to_string(n0)};
  });

  criterion(6, "Garding", [&] {
    const OperatorSystem sys(build_mesh(0.0, len, 64), -5.0, 0.5);
    const double gamma = garding_constant(sys);
    const Eigen::MatrixXd a = sys.form_matrix();
    const Eigen::MatrixXd m = sys.mass().dense();
    const Eigen::MatrixXd k = sys.stiffness().dense();
    std::mt19937_64 rng(31);
    std::normal_distribution<double> normal;
    int violations = 0;
    for (int t = 0; t < 1000; ++t) {
      Eigen::VectorXd u(sys.dofs());
      for (int i = 0; i < sys.dofs(); ++i) u[i] = normal(rng);
      const double rhs = 0.5 * u.dot(k * u);
      if (u.dot(a * u) + gamma * u.dot(m * u) < rhs * (1.0 - 1e-12)) ++violations;
    }
    const double c = interpolation_constant(sys, {}).value;
    const YoungSplitReport y = young_split_audit(sys, {0.01, 0.1, 1.0, 10.0}, c, 1000, 31);
    const bool ok = violations == 0 && y.gamma_split >= gamma * (1.0 - 1e-8);
    return std::pair{ok, "gamma " + fmt(gamma) + ", violations " + std::to_string(violations) + ", gamma_split " +
                             fmt(y.gamma_split)};
  });

  criterion(7, "Gagliardo assembly", [&] {
    const MeshInterval mesh = build_mesh(0.0, len, 4);
    double worst = 0.0;
    for (double s : {0.25, 0.5, 0.75}) {
      worst = std::max(worst, (assemble_gagliardo(mesh, s) - oracle::gagliardo_matrix(mesh, s)).cwiseAbs().maxCoeff());
    }
    return std::pair{worst <= 1e-6, "max entry error " + fmt(worst) + " (limit 1e-6)"};
  });

  criterion(8, "gradient exactness", [&] {
    const OperatorSystem sys(build_mesh(0.0, len, 64), -5.0, 0.5);
    const double power = fd_gradient_error(sys, Nonlinearity::power(10.0, 4.0), 20, 41);
    const double affine =
        fd_gradient_error(sys, Nonlinearity::affine(20.0, [](double x) { return std::sin(3.0 * x) + 0.5; }), 20, 42);
    const double worst = std::max(power, affine);
    return std::pair{worst <= 1e-6, "power " + fmt(power) + ", affine " + fmt(affine) + " (limit 1e-6)"};
  });

  criterion(9, "asymptotically linear solution", [&] {
    const OperatorSystem sys(build_mesh(0.0, len, 128), -5.0, 0.5);
    const Spectrum sp = solve_pencil(sys, 3);
    const double lambda = 0.5 * (sp.lambda(1) + sp.lambda(2));
    const CriticalPointReport r = solve_resolvent(sys, lambda, [](double) { return 1.0; });
    const Eigen::VectorXd rhs = nonlinear_load(Nonlinearity::affine(0.0, [](double) { return 1.0; }), FeField::zero(sys.mesh()));
    const Eigen::VectorXd ref = oracle::dense_solve(sys.form_matrix() - lambda * sys.mass().dense(), rhs);
    const double diff = (r.u.coeffs() - ref).cwiseAbs().maxCoeff() / std::max(1.0, ref.cwiseAbs().maxCoeff());
    bool rejected = false;
    try {
      solve_resolvent(sys, sp.lambda(1), [](double) { return 1.0; });
    } catch (const ResonanceError&) {
      rejected = true;
    }
    const bool ok = r.weak_residual <= 1e-10 && diff <= 1e-10 && rejected;
    return std::pair{ok, "weak residual " + fmt(r.weak_residual) + ", dense-solve difference " + fmt(diff) +
                             ", resonance rejected " + (rejected ? "yes" : "no")};
  });

  criterion(10, "mountain pass", [&] {
    bool ok = true;
    std::string detail;
    const double alpha_star = alpha_threshold(build_mesh(0.0, len, 256), 0.5, {-10.0, 0.0}, 1e-10).alpha_star;
    for (double alpha : {0.0, alpha_star - 0.5}) {
      double j[2] = {0.0, 0.0};
      for (int level = 0; level < 2; ++level) {
        const int n = level == 0 ? 128 : 256;
        const auto t0 = std::chrono::steady_clock::now();
        const OperatorSystem sys(build_mesh(0.0, len, n), alpha, 0.5);
        const double lambda1 = first_eigenvalue(sys);
        // lambda_1 - |lambda_1|/2: equals lambda_1/2 when lambda_1 > 0 and stays below lambda_1 when it is negative.
        const CriticalPointReport r = mountain_pass(sys, Nonlinearity::power(lambda1 - 0.5 * std::abs(lambda1), 4.0));
        const double secs = seconds_since(t0);
        if (lambda1 < 0.0 && level == 0) {
          const CriticalPointReport literal = mountain_pass(sys, Nonlinearity::power(0.5 * lambda1, 4.0));
          detail += "[literal lambda_1/2 = " + fmt(0.5 * lambda1) + " is above lambda_1: " + to_string(literal.status) + "] ";
        }
        const bool case_ok = r.converged() && r.classification == Classification::nontrivial && r.grad_norm <= 1e-8 &&
                             r.J_value > 0.0 && secs <= 120.0;
        ok = ok && case_ok;
        j[level] = r.J_value;
        detail += "alpha " + fmt(alpha) + " n " + std::to_string(n) + ": J " + fmt(r.J_value) + " grad " + fmt(r.grad_norm) +
                  " " + fmt(secs) + "s; ";
      }
      const double rel = std::abs(j[1] - j[0]) / std::abs(j[1]);
      ok = ok && rel <= 1e-3;
      detail += "mesh change " + fmt(rel) + "; ";
    }
    return std::pair{ok, detail};
  });

  criterion(11, "linking", [&] {
    const OperatorSystem sys(build_mesh(0.0, len, 128), 0.0, 0.5);
    const Spectrum sp = solve_pencil(sys, 3);
    const Nonlinearity nl = Nonlinearity::power(0.5 * (sp.lambda(1) + sp.lambda(2)), 4.0);
    const CriticalPointReport r = linking_search(sys, nl, 1);
    const bool geometry = r.geometry && r.geometry->certified && r.geometry->alpha_tilde > 0.0 && r.geometry->boundary_sup <= 0.0;
    const Nonlinearity mp_nl = Nonlinearity::power(0.5 * sp.lambda(1), 4.0);
    const double j_mp = mountain_pass(sys, mp_nl).J_value;
    const double j_link0 = linking_search(sys, mp_nl, 0).J_value;
    const double diff = std::abs(j_mp - j_link0);
    const bool ok = geometry && r.converged() && r.classification == Classification::nontrivial && r.grad_norm <= 1e-6 &&
                    diff <= 1e-6;
    return std::pair{ok, "alpha_tilde " + fmt(r.geometry ? r.geometry->alpha_tilde : 0.0) + ", boundary sup " +
                             fmt(r.geometry ? r.geometry->boundary_sup : 0.0) + ", J " + fmt(r.J_value) + ", grad " +
                             fmt(r.grad_norm) + ", |J_link0 - J_mp| " + fmt(diff)};
  });

  criterion(12, "coercivity gap", [&] {
    bool ok = true;
    std::string detail;
    for (double alpha : {0.0, -5.0}) {
      const OperatorSystem sys(build_mesh(0.0, len, 64), alpha, 0.5);
      const Spectrum sp = solve_pencil(sys, 4);
      for (int k = 1; k <= 2; ++k) {
        double previous = std::numeric_limits<double>::infinity();
        double min_interior = std::numeric_limits<double>::infinity();
        bool monotone = true;
        constexpr int kSteps = 20;
        for (int step = 1; step <= kSteps; ++step) {
          const double theta = sp.lambda(k) + (sp.lambda(k + 1) - sp.lambda(k)) * step / kSteps;
          const double gap = coercivity_gap(sys, [theta](double) { return theta; }, k);
          if (step < kSteps) min_interior = std::min(min_interior, gap);
          monotone = monotone && gap < previous;
          previous = gap;
        }
        ok = ok && min_interior > 0.0 && monotone && std::abs(previous) <= 1e-8;
        detail += "alpha " + fmt(alpha) + " k " + std::to_string(k) + ": min " + fmt(min_interior) + " end " + fmt(previous) +
                  (monotone ? "" : " NOT monotone") + "; ";
      }
    }
    return std::pair{ok, detail};
  });

  criterion(13, "interpolation audit", [&] {
    const OperatorSystem sys(build_mesh(0.0, len, 64), 0.0, 0.5);
    const Spectrum sp = solve_pencil(sys, sys.dofs());
    const ConstantEstimate c = interpolation_constant(sys, {});
    const InequalityAudit audit = interpolation_audit(sys, c.value, sp, 1000, 51);
    return std::pair{audit.violations == 0, "C " + fmt(c.value) + " (exact " + fmt(c.cross_check) + "), fields " +
                                                std::to_string(audit.fields) + ", violations " +
                                                std::to_string(audit.violations)};
  });

  criterion(14, "reproducibility", [&] {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "mixedop_acceptance_repro";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "audit.ini") << "[domain]\nn_elem = 32\n[operator]\nalpha = -5:0:3\n"
                                        "[nonlinearity]\nkind = power\nlambda = halfbelow(1)\n"
                                        "[analysis]\nrestarts = 16\naudit_trials = 200\n";
    const std::string cmd = std::string(MIXEDOP_CLI_PATH) + " full-audit --config " + (dir / "audit.ini").string() +
                            " --seed 5 --out " + (dir / "out").string() + " > /dev/null";
    const int first = std::system(cmd.c_str());
    const auto a = snapshot(dir / "out");
    const int second = std::system(cmd.c_str());
    const auto b = snapshot(dir / "out");
    const bool ran = WIFEXITED(first) && WIFEXITED(second) && WEXITSTATUS(first) == 0 && WEXITSTATUS(second) == 0;
    const bool same = !a.empty() && a == b;
    return std::pair{ran && same, std::to_string(a.size()) + " files, exit " + std::to_string(WEXITSTATUS(first)) + "/" +
                                      std::to_string(WEXITSTATUS(second)) + (same ? ", byte-identical" : ", DIFFER")};
  });

  int failed = 0;
  for (const Line& l : lines) failed += l.pass ? 0 : 1;
  std::printf("%d/%zu criteria passed\n", static_cast<int>(lines.size()) - failed, lines.size());
  return failed == 0 ? 0 : 1;
}
