#include "mixedop/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mixedop/assembly.hpp"
#include "mixedop/error.hpp"
#include "mixedop/functional.hpp"
#include "mixedop/rng.hpp"
#include "mixedop/spectrum.hpp"
#include "mixedop/subspace.hpp"

namespace mixedop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct StartResult {
  double value = kInf;
  Eigen::VectorXd c;
};

// Riemannian descent of sign * J(rho Z c) on the unit sphere |c| = 1.
StartResult descend_on_sphere(const OperatorSystem& sys, const Nonlinearity& nl, const Eigen::MatrixXd& z, double rho,
                              Eigen::VectorXd c, double sign, int max_iter) {
  const MeshInterval& mesh = sys.mesh();
  auto value = [&](const Eigen::VectorXd& cc) { return sign * J_eval(sys, nl, FeField(mesh, rho * (z * cc))); };
  auto gradient = [&](const Eigen::VectorXd& cc) {
    return Eigen::VectorXd(sign * rho * (z.transpose() * J_gradient_vector(sys, nl, FeField(mesh, rho * (z * cc)))));
  };
  c.normalize();
  double f = value(c);
  double step = 1.0 / (rho * rho);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd g = gradient(c);
    g -= g.dot(c) * c;
    const double gn2 = g.squaredNorm();
    if (std::sqrt(gn2) <= 1e-12 * std::max(1.0, std::abs(f))) break;
    bool accepted = false;
    step *= 2.0;
    for (int bt = 0; bt < 60; ++bt) {
      const Eigen::VectorXd trial = (c - step * g).normalized();
      const double ft = value(trial);
      if (ft <= f - 1e-4 * step * gn2) {
        c = trial;
        f = ft;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return {f, c};
}

}  // namespace

SphereMinimum minimize_on_sphere(const OperatorSystem& sys, const Nonlinearity& nl, const Eigen::MatrixXd& basis,
                                 double rho, const GeometryProbe& probe, std::uint64_t stream, bool maximize) {
  const Eigen::Index dim = basis.cols();
  if (dim == 0) throw DomainError("sphere in a zero-dimensional subspace");
  const double sign = maximize ? -1.0 : 1.0;
  const int starts = std::max(probe.starts, 2);

  // Lowest curvature direction of sign * J at the origin within span(Z).
  const Eigen::MatrixXd h0 = sign * (basis.transpose() * J_hessian(sys, nl, FeField::zero(sys.mesh())) * basis);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (h0 + h0.transpose()));
  std::vector<Eigen::VectorXd> seeds(static_cast<std::size_t>(starts));
  seeds[0] = eig.eigenvectors().col(0);
  seeds[1] = -eig.eigenvectors().col(0);
  for (int s = 2; s < starts; ++s) {
    std::mt19937_64 rng = make_rng(probe.seed, stream * 1000 + static_cast<std::uint64_t>(s));
    std::normal_distribution<double> normal;
    Eigen::VectorXd c(dim);
    for (Eigen::Index i = 0; i < dim; ++i) c[i] = normal(rng);
    seeds[static_cast<std::size_t>(s)] = c;
  }

  std::vector<StartResult> results(static_cast<std::size_t>(starts));
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < starts; ++s) {
    results[static_cast<std::size_t>(s)] =
        descend_on_sphere(sys, nl, basis, rho, seeds[static_cast<std::size_t>(s)], sign, probe.max_iter);
  }

  std::size_t best = 0;
  for (std::size_t s = 1; s < results.size(); ++s) {
    if (results[s].value < results[best].value) best = s;
  }
  SphereMinimum out;
  out.value = sign * results[best].value;
  out.point = rho * (basis * results[best].c);
  const double scale = std::max(1.0, std::abs(results[best].value));
  for (const auto& r : results) {
    if (r.value - results[best].value <= probe.spread_tol * scale) ++out.agreeing_starts;
  }
  out.inconclusive = out.agreeing_starts < 2;
  return out;
}

namespace {

// Points of Delta are Y w + t e with |w| <= R (Y X-orthonormal) and 0 <= t <= R.
struct DeltaFaces {
  const OperatorSystem& sys;
  const Nonlinearity& nl;
  const Eigen::MatrixXd& y;
  const Eigen::VectorXd& e;
  double r;

  enum class Face { bottom, top, side };

  double value(const Eigen::VectorXd& w, double t) const {
    return J_eval(sys, nl, FeField(sys.mesh(), y * w + t * e));
  }

  void project(Face face, Eigen::VectorXd& w, double& t) const {
    const double wn = w.norm();
    switch (face) {
      case Face::bottom:
        t = 0.0;
        if (wn > r) w *= r / wn;
        break;
      case Face::top:
        t = r;
        if (wn > r) w *= r / wn;
        break;
      case Face::side:
        t = std::clamp(t, 0.0, r);
        if (wn > 0.0) w *= r / wn;
        break;
    }
  }

  // Projected gradient ascent from (w, t) on one face.
  double ascend(Face face, Eigen::VectorXd w, double t, int iters) const {
    project(face, w, t);
    double f = value(w, t);
    double step = 1.0;
    for (int it = 0; it < iters; ++it) {
      const Eigen::VectorXd g = J_gradient_vector(sys, nl, FeField(sys.mesh(), y * w + t * e));
      const Eigen::VectorXd gw = y.transpose() * g;
      const double gt = e.dot(g);
      bool accepted = false;
      for (int bt = 0; bt < 30; ++bt) {
        Eigen::VectorXd w2 = w + step * gw;
        double t2 = t + step * gt;
        project(face, w2, t2);
        const double f2 = value(w2, t2);
        if (f2 > f) {
          w = w2;
          t = t2;
          f = f2;
          accepted = true;
          step *= 2.0;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
    }
    return f;
  }
};

}  // namespace

LinkingGeometryReport verify_geometry(const OperatorSystem& sys, const Nonlinearity& nl, int k,
                                      const GeometryProbe& probe) {
  const GeometryMode mode =
      std::holds_alternative<AffineLinear>(nl.kind()) ? GeometryMode::saddle : GeometryMode::linking;
  return verify_geometry(sys, nl, k, mode, probe);
}

LinkingGeometryReport verify_geometry(const OperatorSystem& sys, const Nonlinearity& nl, int k, GeometryMode mode,
                                      const GeometryProbe& probe) {
  if (k < 0 || k + 1 > sys.dofs()) throw DomainError("geometry index k out of range");
  if (probe.rho_grid.empty()) throw DomainError("geometry probe needs a nonempty rho grid");
  const Spectrum spectrum = solve_pencil(sys, std::min(sys.dofs(), k + 2));
  const Eigen::MatrixXd y = leading_span_basis(spectrum, sys, k);
  const Eigen::MatrixXd z = complement_basis(spectrum, sys, k);

  LinkingGeometryReport rep;
  rep.k = k;
  rep.mode = mode;

  // Small sphere in P_{k+1}.
  rep.alpha_tilde = -kInf;
  std::uint64_t stream = 1;
  for (double rho : probe.rho_grid) {
    const SphereMinimum m = minimize_on_sphere(sys, nl, z, rho, probe, stream++);
    if (m.value > rep.alpha_tilde) {
      rep.alpha_tilde = m.value;
      rep.rho_small = rho;
      rep.inconclusive = m.inconclusive;
    }
  }

  if (mode == GeometryMode::saddle) {
    // J restricted to P_{k+1} is quadratic plus a linear load for the affine kind.
    const FeField zero = FeField::zero(sys.mesh());
    const Eigen::MatrixXd q = z.transpose() * J_hessian(sys, nl, zero) * z;
    const Eigen::VectorXd b = -(z.transpose() * J_gradient_vector(sys, nl, zero));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eq(0.5 * (q + q.transpose()));
    if (eq.eigenvalues()[0] > 0.0) {
      const Eigen::LLT<Eigen::MatrixXd> chol(q);
      rep.subspace_inf = -0.5 * b.dot(chol.solve(b));
    } else {
      rep.subspace_inf = -kInf;
    }
    if (k == 0) {
      rep.boundary_sup = -kInf;
      rep.rho_big = 0.0;
    } else {
      rep.boundary_sup = kInf;
      for (double t = 1.0; t <= probe.rho_big_max; t *= 2.0) {
        const SphereMinimum m = minimize_on_sphere(sys, nl, y, t, probe, stream++, true);
        rep.boundary_sup = m.value;
        rep.rho_big = t;
        rep.inconclusive = rep.inconclusive || m.inconclusive;
        if (m.value < *rep.subspace_inf) break;
      }
    }
    rep.certified = std::isfinite(*rep.subspace_inf) && rep.boundary_sup < *rep.subspace_inf;
    rep.message = rep.certified ? "saddle geometry certified" : "saddle geometry not certified";
    return rep;
  }

  // Linking: Delta spanned by H_k and the X-normalized u_{k+1}.
  const Eigen::VectorXd e = x_normalized(sys, spectrum.vectors.col(k));
  rep.boundary_sup = kInf;
  for (double r = std::max(2.0 * rep.rho_small, 1.0); r <= probe.rho_big_max; r *= 2.0) {
    const DeltaFaces faces{sys, nl, y, e, r};
    double sup = 0.0;  // J(0) = 0 is a point of the bottom face
    std::mt19937_64 rng = make_rng(probe.seed, 7000 + static_cast<std::uint64_t>(std::log2(r) + 64));
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    using Face = DeltaFaces::Face;
    std::vector<Face> face_list{Face::top};
    if (k > 0) {
      face_list.push_back(Face::bottom);
      face_list.push_back(Face::side);
    }
    for (Face face : face_list) {
      struct Sample {
        double f;
        Eigen::VectorXd w;
        double t;
      };
      std::vector<Sample> samples;
      const int count = k == 0 ? 1 : probe.boundary_samples;
      for (int i = 0; i < count; ++i) {
        Eigen::VectorXd w(k);
        for (int j = 0; j < k; ++j) w[j] = normal(rng);
        const double radius = k > 0 ? r * std::pow(unit(rng), 1.0 / k) : 0.0;
        if (k > 0) w *= radius / w.norm();
        double t = r * unit(rng);
        faces.project(face, w, t);
        samples.push_back({faces.value(w, t), w, t});
      }
      std::stable_sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) { return a.f > b.f; });
      const std::size_t refine = std::min<std::size_t>(samples.size(), 8);
      for (std::size_t i = 0; i < refine; ++i) {
        sup = std::max(sup, faces.ascend(face, samples[i].w, samples[i].t, 100));
      }
    }
    rep.boundary_sup = sup;
    rep.rho_big = r;
    if (sup <= 0.0) break;
  }
  rep.certified = rep.alpha_tilde > 0.0 && rep.boundary_sup <= 0.0 && rep.rho_big > rep.rho_small;
  rep.message = rep.certified ? "linking geometry certified"
                : rep.alpha_tilde <= 0.0
                    ? "inf of J on the small sphere of P_{k+1} is not positive"
                    : "J is not nonpositive on the boundary of Delta";
  return rep;
}

double coercivity_gap(const OperatorSystem& sys, const std::function<double(double)>& theta_bar, int k) {
  if (k < 0 || k + 1 > sys.dofs()) throw DomainError("coercivity_gap index k out of range");
  const Spectrum spectrum = solve_pencil(sys, std::max(1, k));
  const Eigen::MatrixXd z = complement_basis(spectrum, sys, k);
  const Eigen::MatrixXd a = sys.form_matrix() - assemble_weighted_mass(sys.mesh(), theta_bar).dense();
  const Eigen::MatrixXd q = z.transpose() * a * z;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (q + q.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues()[0];
}

}  // namespace mixedop
