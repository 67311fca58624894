#include "mixedop/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "mixedop/error.hpp"
#include "mixedop/rng.hpp"

namespace mixedop {

PencilEigen smallest_pencil_eigenpairs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int count) {
  const Eigen::Index n = a.rows();
  if (count < 1 || count > n) throw DomainError("requested " + std::to_string(count) + " eigenpairs of an order-" + std::to_string(n) + " pencil");
  const Eigen::LLT<Eigen::MatrixXd> chol(b);
  if (chol.info() != Eigen::Success) {
    throw NumericalError("Cholesky factorization of the mass matrix failed (mass assembly is broken)");
  }
  // C = L^{-1} A L^{-T}
  Eigen::MatrixXd c = chol.matrixL().solve(a);
  c = chol.matrixL().solve(c.transpose()).transpose();
  c = 0.5 * (c + c.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
  if (eig.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  PencilEigen out;
  out.values = eig.eigenvalues().head(count);
  out.vectors = chol.matrixU().solve(eig.eigenvectors().leftCols(count));
  return out;
}

FeField Spectrum::eigenfield(int k) const {
  if (k < 1 || k > count()) throw DomainError("eigenfield index " + std::to_string(k) + " out of range");
  return FeField(mesh, vectors.col(k - 1));
}

int default_eigenpair_count(const OperatorSystem& sys) { return std::min(sys.dofs(), 12); }

namespace {

void normalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double big = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-3 * big) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

Eigen::Index dominant_index(const Eigen::VectorXd& v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  return idx;
}

// Symmetric (Loewdin) orthonormalization of a cluster in the M inner product,
// then deterministic ordering by dominant coefficient.
void canonicalize_cluster(Eigen::MatrixXd& vectors, const Eigen::MatrixXd& mass, Eigen::Index first, Eigen::Index size) {
  Eigen::MatrixXd block = vectors.middleCols(first, size);
  const Eigen::MatrixXd gram = block.transpose() * mass * block;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> g(gram);
  block = block * g.operatorInverseSqrt();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(size));
  std::iota(order.begin(), order.end(), 0);
  std::vector<Eigen::Index> dom(static_cast<std::size_t>(size));
  for (Eigen::Index j = 0; j < size; ++j) dom[static_cast<std::size_t>(j)] = dominant_index(block.col(j));
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return dom[static_cast<std::size_t>(x)] < dom[static_cast<std::size_t>(y)]; });
  for (Eigen::Index j = 0; j < size; ++j) vectors.col(first + j) = block.col(order[static_cast<std::size_t>(j)]);
}

}  // namespace

Spectrum solve_pencil(const OperatorSystem& sys, int m, const SpectrumOptions& options) {
  if (m < 1 || m > sys.dofs()) {
    throw DomainError("eigenpair count m=" + std::to_string(m) + " must lie in [1, " + std::to_string(sys.dofs()) + "]");
  }
  const Eigen::MatrixXd a = sys.form_matrix();
  const Eigen::MatrixXd mass = sys.mass().dense();
  PencilEigen pe = smallest_pencil_eigenpairs(a, mass, m);

  Eigen::Index start = 0;
  for (Eigen::Index k = 1; k <= m; ++k) {
    const bool split = k == m || std::abs(pe.values[k] - pe.values[k - 1]) >
                                     options.cluster_tol * std::max(1.0, std::abs(pe.values[k]));
    if (split) {
      if (k - start > 1) canonicalize_cluster(pe.vectors, mass, start, k - start);
      start = k;
    }
  }
  for (Eigen::Index k = 0; k < m; ++k) normalize_sign(pe.vectors.col(k));

  const double a_norm = a.norm();
  const double m_norm = mass.norm();
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::VectorXd v = pe.vectors.col(k);
    const double lambda = pe.values[k];
    const double res = (a * v - lambda * (mass * v)).norm() / ((a_norm + std::abs(lambda) * m_norm) * v.norm());
    if (!(res <= options.residual_tol)) {
      throw NumericalError("eigenpair " + std::to_string(k + 1) + " residual " + std::to_string(res) + " above tolerance");
    }
  }

  Spectrum out{pe.values, pe.vectors, std::nullopt, sys.alpha(), sys.s(), sys.mesh()};
  for (int k = 1; k <= m; ++k) {
    if (out.lambda(k) > 0.0) {
      out.n0 = k;
      break;
    }
  }
  return out;
}

double first_eigenvalue(const OperatorSystem& sys) {
  return smallest_pencil_eigenpairs(sys.form_matrix(), sys.mass().dense(), 1).values[0];
}

CharacterizationResult verify_characterization(const Spectrum& spectrum, const OperatorSystem& sys, int k, int trials,
                                               std::uint64_t seed, double zero_tol) {
  if (k < 1 || k > spectrum.count()) throw DomainError("characterization index k out of computed range");
  for (int j = 1; j < k; ++j) {
    if (std::abs(spectrum.lambda(j)) < zero_tol) {
      throw ZeroEigenvalueError(j, spectrum.lambda(j),
                                "lambda_" + std::to_string(j) + " is numerically zero; B-orthogonality to u_" +
                                    std::to_string(j) + " is vacuous and P_k is not determined past it");
    }
  }
  const Eigen::MatrixXd a = sys.form_matrix();
  const Eigen::MatrixXd mass = sys.mass().dense();
  const Eigen::Index n = a.rows();
  const Eigen::Index c = k - 1;

  // Basis of P_k = { u : B(u, u_j) = 0, j < k } from a full QR of the constraint rows.
  Eigen::MatrixXd basis;
  if (c == 0) {
    basis = Eigen::MatrixXd::Identity(n, n);
  } else {
    const Eigen::MatrixXd constraints_t = a * spectrum.vectors.leftCols(c);  // columns = (A u_j)
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(constraints_t);
    if (qr.rank() < c) throw NumericalError("B-orthogonality constraints are rank deficient");
    const Eigen::MatrixXd q = qr.householderQ();
    basis = q.rightCols(n - c);
  }
  const Eigen::MatrixXd pa = basis.transpose() * a * basis;
  const Eigen::MatrixXd pm = basis.transpose() * mass * basis;
  const PencilEigen reduced = smallest_pencil_eigenpairs(pa, pm, 1);

  CharacterizationResult out;
  out.minimum = reduced.values[0];
  out.discrepancy = std::abs(out.minimum - spectrum.lambda(k));
  out.minimizer = basis * reduced.vectors.col(0);
  out.minimizer /= std::sqrt(out.minimizer.dot(mass * out.minimizer));
  const Eigen::VectorXd grad = basis.transpose() * (a * out.minimizer - out.minimum * (mass * out.minimizer));
  out.stationarity = grad.norm() / std::max(1.0, (a * out.minimizer).norm());

  std::mt19937_64 rng = make_rng(seed, 0);
  std::normal_distribution<double> normal;
  out.random_floor = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd coords(basis.cols());
    for (Eigen::Index i = 0; i < coords.size(); ++i) coords[i] = normal(rng);
    const Eigen::VectorXd u = basis * coords;
    out.random_floor = std::min(out.random_floor, u.dot(a * u) / u.dot(mass * u));
  }
  return out;
}

int first_positive_index(const Spectrum& spectrum) {
  if (spectrum.count() == 0) throw DomainError("empty spectrum");
  for (int k = 1; k <= spectrum.count(); ++k) {
    if (spectrum.lambda(k) > 0.0) return k;
  }
  throw NumericalError("all " + std::to_string(spectrum.count()) +
                       " computed eigenvalues are nonpositive; increase m to locate the first positive one");
}

BoundCheckReport bound_checks(const Spectrum& spectrum, const OperatorSystem& sys, int k, int trials, std::uint64_t seed) {
  if (k < 1 || k + 1 > spectrum.count()) throw DomainError("bound_checks needs eigenpairs up to k+1");
  const Eigen::MatrixXd mass = sys.mass().dense();
  const Eigen::MatrixXd head = spectrum.vectors.leftCols(k);
  const int n = sys.dofs();
  BoundCheckReport out;
  out.trials = trials;
  out.upper_violation = -std::numeric_limits<double>::infinity();
  out.lower_violation = -std::numeric_limits<double>::infinity();
  std::normal_distribution<double> normal;
  std::mt19937_64 rng_h = make_rng(seed, 1);
  std::mt19937_64 rng_p = make_rng(seed, 2);
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd c(k);
    for (int i = 0; i < k; ++i) c[i] = normal(rng_h);
    Eigen::VectorXd u = head * c;
    u /= std::sqrt(u.dot(mass * u));
    out.upper_violation = std::max(out.upper_violation, u.dot(sys.apply_form(u)) - spectrum.lambda(k));

    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w[i] = normal(rng_p);
    w -= head * (head.transpose() * (mass * w));
    w /= std::sqrt(w.dot(mass * w));
    out.lower_violation = std::max(out.lower_violation, spectrum.lambda(k + 1) - w.dot(sys.apply_form(w)));
  }
  out.upper_violation = std::max(out.upper_violation, 0.0);
  out.lower_violation = std::max(out.lower_violation, 0.0);
  return out;
}

double garding_constant(const OperatorSystem& sys) {
  Eigen::MatrixXd a = sys.form_matrix() - 0.5 * sys.stiffness().dense();
  const double lowest = smallest_pencil_eigenpairs(a, sys.mass().dense(), 1).values[0];
  return std::max(0.0, -lowest);
}

ThresholdResult alpha_threshold(const OperatorSystem& sys, std::pair<double, double> bracket, double tol) {
  auto [lo, hi] = bracket;
  if (!(lo < hi)) throw DomainError("alpha bracket must satisfy lo < hi");
  const double f_lo = first_eigenvalue(sys.with_alpha(lo));
  const double f_hi = first_eigenvalue(sys.with_alpha(hi));
  if (!(f_lo < 0.0 && f_hi > 0.0)) {
    throw DomainError("invalid alpha bracket: lambda_1(" + std::to_string(lo) + ") = " + std::to_string(f_lo) +
                      ", lambda_1(" + std::to_string(hi) + ") = " + std::to_string(f_hi) + "; need a sign change from - to +");
  }
  ThresholdResult out;
  for (int iter = 1; iter <= 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double f = first_eigenvalue(sys.with_alpha(mid));
    out.iterations = iter;
    if (f < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (std::abs(f) <= tol) {
      out.alpha_star = mid;
      out.lambda1_at_star = f;
      out.bracket = {lo, hi};
      return out;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid))) break;
  }
  throw NumericalError("alpha_threshold: bracket collapsed before |lambda_1| <= tol");
}

ThresholdResult alpha_threshold(const MeshInterval& mesh, double s, std::pair<double, double> bracket, double tol) {
  return alpha_threshold(OperatorSystem(mesh, 0.0, s), bracket, tol);
}

}  // namespace mixedop
