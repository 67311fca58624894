#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "mixedop/error.hpp"
#include "mixedop/functional.hpp"
#include "mixedop/geometry.hpp"
#include "mixedop/solvers.hpp"
#include "mixedop/spectrum.hpp"

namespace mixedop {
namespace {

double bump(double x) { return std::sin(3.0 * x) + 0.5; }

// Load vector int a phi_i by adaptive quadrature on each half-support.
Eigen::VectorXd load_oracle(const MeshInterval& mesh, const std::function<double(double)>& a) {
  Eigen::VectorXd b(mesh.dofs());
  for (int i = 0; i < mesh.dofs(); ++i) {
    const double xl = mesh.vertex(i);
    const double xc = mesh.vertex(i + 1);
    const double xr = mesh.vertex(i + 2);
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    b[i] = GK::integrate([&](double x) { return a(x) * (x - xl) / (xc - xl); }, xl, xc, 5, 1e-14) +
           GK::integrate([&](double x) { return a(x) * (xr - x) / (xr - xc); }, xc, xr, 5, 1e-14);
  }
  return b;
}

// Full generalized eigendecomposition of (K + alpha S, M), M-orthonormal columns.
Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> full_pencil(const OperatorSystem& sys) {
  return Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd>(sys.form_matrix(), sys.mass().dense());
}

double dense_dual_norm(const OperatorSystem& sys, const Eigen::VectorXd& r) {
  return std::sqrt(r.dot(Eigen::FullPivLU<Eigen::MatrixXd>(sys.stiffness().dense()).solve(r)));
}

TEST(Resolvent, ZeroLoadGivesZero) {
  const OperatorSystem sys(build_mesh(0.0, 1.0, 32), 0.4, 0.5);
  const CriticalPointReport r = solve_resolvent(sys, 3.0, [](double) { return 0.0; });
  EXPECT_EQ(r.u.coeffs().norm(), 0.0);
  EXPECT_TRUE(r.converged());
  EXPECT_EQ(r.classification, Classification::trivial);
}

TEST(Resolvent, PoissonIsNodallyExact) {
  const MeshInterval mesh = build_mesh(0.0, 1.0, 20);
  const OperatorSystem sys(mesh, 0.0, 0.5);
  const CriticalPointReport r = solve_resolvent(sys, 0.0, [](double) { return 1.0; });
  for (int i = 0; i < mesh.dofs(); ++i) {
    const double x = mesh.node(i);
    EXPECT_NEAR(r.u.coeffs()[i], 0.5 * x * (1.0 - x), 1e-13) << "node " << i;
  }
  EXPECT_TRUE(r.converged());
}

TEST(Resolvent, MatchesDenseSolve) {
  const MeshInterval mesh = build_mesh(0.0, 1.0, 16);
  const OperatorSystem sys(mesh, 0.7, 0.4);
  const double lambda = 3.0;
  const Eigen::MatrixXd a = sys.form_matrix() - lambda * sys.mass().dense();
  const Eigen::VectorXd expected = Eigen::FullPivLU<Eigen::MatrixXd>(a).solve(load_oracle(mesh, bump));
  const CriticalPointReport r = solve_resolvent(sys, lambda, bump);
  EXPECT_LE((r.u.coeffs() - expected).lpNorm<Eigen::Infinity>(), 1e-10 * expected.lpNorm<Eigen::Infinity>());
}

TEST(Resolvent, NodalLoadUsesMassMatrix) {
  const MeshInterval mesh = build_mesh(0.0, 1.0, 16);
  const OperatorSystem sys(mesh, -0.3, 0.5);
  const FeField a = interpolate(bump, mesh);
  const Eigen::MatrixXd op = sys.form_matrix() - 2.0 * sys.mass().dense();
  const Eigen::VectorXd expected = Eigen::FullPivLU<Eigen::MatrixXd>(op).solve(sys.mass().apply(a.coeffs()));
  const CriticalPointReport r = solve_resolvent(sys, 2.0, a);
  EXPECT_LE((r.u.coeffs() - expected).norm(), 1e-10 * expected.norm());
}

TEST(Resolvent, ResonanceNamesTheEigenvalue) {
  const OperatorSystem sys(build_mesh(0.0, 1.0, 24), 0.5, 0.5);
  const Spectrum sp = solve_pencil(sys, 3);
  try {
    solve_resolvent(sys, sp.lambda(2), bump);
    FAIL() << "expected ResonanceError";
  } catch (const ResonanceError& e) {
    EXPECT_EQ(e.index(), 2);
  }
  EXPECT_NO_THROW(solve_resolvent(sys, sp.lambda(2) + 1e-3, bump));
}

TEST(Certificates, WeakResidualMatchesMatrixOracle) {
  const MeshInterval mesh = build_mesh(0.0, 1.0, 24);
  const OperatorSystem sys(mesh, 0.8, 0.3);
  // f = lambda t: the Gauss rule integrates lambda u phi exactly, so the load is lambda M u.
  const double lambda = 5.0;
  const Nonlinearity nl = Nonlinearity::affine(lambda, [](double) { return 0.0; });
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd c(mesh.dofs());
    for (int i = 0; i < c.size(); ++i) c[i] = normal(rng);
    const Eigen::VectorXd r = (sys.form_matrix() - lambda * sys.mass().dense()) * c;
    const double expected = dense_dual_norm(sys, r);
    EXPECT_NEAR(weak_residual(sys, nl, FeField(mesh, c)), expected, 1e-11 * expected);
    const CriticalPointReport rep = certify(sys, nl, FeField(mesh, c), 1e-8, 1e-6);
    EXPECT_NEAR(rep.grad_norm, expected, 1e-10 * expected);
    EXPECT_FALSE(rep.converged());
  }
}

TEST(Newton, RecoversResolventSolution) {
  const MeshInterval mesh = build_mesh(0.0, 1.0, 32);
  const OperatorSystem sys(mesh, 0.5, 0.5);
  const Nonlinearity nl = Nonlinearity::affine(4.0, bump);
  const CriticalPointReport lin = solve_resolvent(sys, 4.0, bump);
  const CriticalPointReport r = newton_refine(sys, nl, FeField::zero(mesh));
  ASSERT_TRUE(r.converged());
  EXPECT_LE((r.u.coeffs() - lin.u.coeffs()).norm(), 1e-9 * lin.u.coeffs().norm());
  EXPECT_LE(r.iterations, 3);
}

TEST(Newton, UniqueCriticalPointFromRandomStarts) {
  const MeshInterval mesh = build_mesh(0.0, 1.0, 32);
  const OperatorSystem sys(mesh, -0.4, 0.5);
  const Spectrum sp = solve_pencil(sys, 3);
  const double lambda = 0.5 * (sp.lambda(1) + sp.lambda(2));
  const Nonlinearity nl = Nonlinearity::affine(lambda, bump);
  const Eigen::VectorXd target = solve_resolvent(sys, lambda, bump).u.coeffs();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int start = 0; start < 20; ++start) {
    Eigen::VectorXd c(mesh.dofs());
    for (int i = 0; i < c.size(); ++i) c[i] = normal(rng);
    const CriticalPointReport r = newton_refine(sys, nl, FeField(mesh, c));
    ASSERT_TRUE(r.converged()) << "start " << start;
    EXPECT_LE((r.u.coeffs() - target).norm(), 1e-8 * target.norm()) << "start " << start;
  }
}

TEST(Newton, QuadraticTailFromMountainPassPoint) {
  const MeshInterval mesh = build_mesh(0.0, 1.0, 64);
  const OperatorSystem sys(mesh, 0.0, 0.5);
  const Nonlinearity nl = Nonlinearity::power(0.5 * solve_pencil(sys, 1).lambda(1), 4.0);
  const CriticalPointReport mp = mountain_pass(sys, nl);
  ASSERT_TRUE(mp.converged());
  // Perturb the certified point, then check Newton returns below 1e-10 within 10 steps.
  Eigen::VectorXd c = mp.u.coeffs();
  for (int i = 0; i < c.size(); ++i) c[i] *= 1.0 + 0.01 * std::sin(7.0 * i);
  SolverConfig cfg;
  cfg.tol = 1e-10;
  const CriticalPointReport r = newton_refine(sys, nl, FeField(mesh, c), cfg);
  EXPECT_LE(r.grad_norm, 1e-10);
  EXPECT_LE(r.iterations, 10);
  EXPECT_NEAR(r.J_value, mp.J_value, 1e-10);
}

class ModelProblem : public ::testing::Test {
 protected:
  static constexpr int kElems = 64;
  ModelProblem()
      : mesh(build_mesh(0.0, 1.0, kElems)),
        sys(mesh, 0.0, 0.5),
        mp_nl(Nonlinearity::power(0.5 * solve_pencil(sys, 1).lambda(1), 4.0)) {}
  MeshInterval mesh;
  OperatorSystem sys;
  Nonlinearity mp_nl;
};

TEST_F(ModelProblem, MountainPassRegression) {
  const CriticalPointReport r = mountain_pass(sys, mp_nl);
  ASSERT_TRUE(r.converged());
  EXPECT_EQ(r.classification, Classification::nontrivial);
  EXPECT_LE(r.grad_norm, 1e-8);
  EXPECT_LE(r.weak_residual, 1e-7);
  EXPECT_NEAR(r.J_value, 4.0023000969182, 1e-9);
  ASSERT_TRUE(r.geometry.has_value());
  EXPECT_GT(r.geometry->alpha_tilde, 0.0);
  // Positive solution: the mountain-pass point of an odd superlinear f has one sign.
  EXPECT_GT(r.u.coeffs().minCoeff(), 0.0);
}

TEST_F(ModelProblem, PathMaximumDecreasesAcrossAcceptedIterations) {
  const CriticalPointReport r = mountain_pass(sys, mp_nl);
  ASSERT_GE(r.path_history.size(), 2u);
  int checked = 0;
  for (std::size_t i = 1; i < r.path_history.size(); ++i) {
    // Consecutive descent indices bracket one accepted deformation.
    const PathRecord& prev = r.path_history[i - 1];
    if (prev.phase != PathPhase::descent || r.path_history[i].phase != PathPhase::descent) continue;
    if (r.path_history[i].iteration != prev.iteration + 1) continue;
    EXPECT_LE(r.path_history[i].J, r.path_history[i - 1].J) << "iteration " << r.path_history[i].iteration;
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST_F(ModelProblem, LinkingAtZeroReproducesMountainPass) {
  const CriticalPointReport mp = mountain_pass(sys, mp_nl);
  const CriticalPointReport link = linking_search(sys, mp_nl, 0);
  ASSERT_TRUE(mp.converged());
  ASSERT_TRUE(link.converged());
  EXPECT_NEAR(link.J_value, mp.J_value, 1e-6);
}

TEST_F(ModelProblem, LinkingAboveFirstEigenvalue) {
  const Spectrum sp = solve_pencil(sys, 2);
  const Nonlinearity nl = Nonlinearity::power(0.5 * (sp.lambda(1) + sp.lambda(2)), 4.0);
  const CriticalPointReport r = linking_search(sys, nl, 1);
  ASSERT_TRUE(r.geometry.has_value());
  EXPECT_TRUE(r.geometry->certified);
  EXPECT_GT(r.geometry->alpha_tilde, 0.0);
  EXPECT_LE(r.geometry->boundary_sup, 0.0);
  ASSERT_TRUE(r.converged());
  EXPECT_EQ(r.classification, Classification::nontrivial);
  EXPECT_LE(r.grad_norm, 1e-6);
  EXPECT_GT(r.J_value, r.geometry->alpha_tilde);
}

TEST_F(ModelProblem, MountainPassRefusesWithoutGeometry) {
  const Spectrum sp = solve_pencil(sys, 2);
  const Nonlinearity nl = Nonlinearity::power(1.2 * sp.lambda(1), 4.0);
  const CriticalPointReport r = mountain_pass(sys, nl);
  EXPECT_EQ(r.status, SolverStatus::geometry_failed);
  EXPECT_FALSE(r.converged());
  ASSERT_TRUE(r.geometry.has_value());
  EXPECT_FALSE(r.geometry->certified);
}

TEST(Geometry, SaddleInfimumMatchesEigenExpansion) {
  const MeshInterval mesh = build_mesh(0.0, 1.0, 16);
  const OperatorSystem sys(mesh, 0.3, 0.5);
  const auto pencil = full_pencil(sys);
  const int k = 1;
  const double lambda = 0.5 * (pencil.eigenvalues()[0] + pencil.eigenvalues()[1]);
  const Nonlinearity nl = Nonlinearity::affine(lambda, bump);
  const Eigen::VectorXd b = load_oracle(mesh, bump);
  double expected = 0.0;
  for (int j = k; j < mesh.dofs(); ++j) {
    const double bj = b.dot(pencil.eigenvectors().col(j));
    expected -= 0.5 * bj * bj / (pencil.eigenvalues()[j] - lambda);
  }
  GeometryProbe probe;
  probe.starts = 4;
  const LinkingGeometryReport rep = verify_geometry(sys, nl, k, probe);
  EXPECT_EQ(rep.mode, GeometryMode::saddle);
  ASSERT_TRUE(rep.subspace_inf.has_value());
  EXPECT_NEAR(*rep.subspace_inf, expected, 1e-9 * std::abs(expected));
  EXPECT_TRUE(rep.certified);
  EXPECT_LT(rep.boundary_sup, *rep.subspace_inf);
}

TEST(Geometry, LinkingFailsAboveNextEigenvalue) {
  const OperatorSystem sys(build_mesh(0.0, 1.0, 32), 0.0, 0.5);
  const Spectrum sp = solve_pencil(sys, 3);
  const Nonlinearity nl = Nonlinearity::power(sp.lambda(2) + 0.2 * (sp.lambda(3) - sp.lambda(2)), 4.0);
  GeometryProbe probe;
  probe.boundary_samples = 32;
  const LinkingGeometryReport rep = verify_geometry(sys, nl, 1, probe);
  EXPECT_FALSE(rep.certified);
  EXPECT_LT(rep.alpha_tilde, 0.0);
}

TEST(Coercivity, PositiveBetweenEigenvaluesAndClosing) {
  const OperatorSystem sys(build_mesh(0.0, 1.0, 32), -0.5, 0.5);
  const Spectrum sp = solve_pencil(sys, 3);
  const int k = 1;
  double previous = std::numeric_limits<double>::infinity();
  for (int step = 1; step <= 10; ++step) {
    const double theta = sp.lambda(k) + (sp.lambda(k + 1) - sp.lambda(k)) * step / 10.0;
    const double gap = coercivity_gap(sys, [theta](double) { return theta; }, k);
    if (step < 10) EXPECT_GT(gap, 0.0) << "theta " << theta;
    EXPECT_LT(gap, previous);
    previous = gap;
  }
  EXPECT_LE(std::abs(previous), 1e-8);
}

TEST(Coercivity, MatchesProjectedPencilOracle) {
  const MeshInterval mesh = build_mesh(0.0, 1.0, 8);
  const OperatorSystem sys(mesh, 0.6, 0.3);
  const auto pencil = full_pencil(sys);
  const int k = 2;
  const double theta = 0.3 * pencil.eigenvalues()[k - 1] + 0.7 * pencil.eigenvalues()[k];
  // On span{v_j : j > k} the numerator is diagonal: sum (lambda_j - theta) c_j^2.
  const int rest = mesh.dofs() - k;
  const Eigen::MatrixXd v = pencil.eigenvectors().rightCols(rest);
  const Eigen::VectorXd num = pencil.eigenvalues().tail(rest).array() - theta;
  const Eigen::MatrixXd den = v.transpose() * sys.stiffness().dense() * v;
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> proj(Eigen::MatrixXd(num.asDiagonal()), den);
  const double expected = proj.eigenvalues()[0];
  EXPECT_NEAR(coercivity_gap(sys, [theta](double) { return theta; }, k), expected, 1e-10 * (1.0 + std::abs(expected)));

  // Random directions in the same subspace never go below it.
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 500; ++t) {
    Eigen::VectorXd c(rest);
    for (int i = 0; i < rest; ++i) c[i] = normal(rng);
    const double q = c.dot(num.asDiagonal() * c) / c.dot(den * c);
    EXPECT_GE(q, expected - 1e-12);
  }
}

}  // namespace
}  // namespace mixedop
