#include "mixedop/functional.hpp"

#include <cmath>
#include <sstream>

#include "mixedop/assembly.hpp"
#include "mixedop/error.hpp"
#include "mixedop/quadrature.hpp"

namespace mixedop {

namespace {

[[noreturn]] void non_finite(const char* what, double x, double t) {
  std::ostringstream msg;
  msg << "non-finite " << what << " at quadrature point x=" << x << " (u=" << t << ")";
  throw NumericalError(msg.str());
}

}  // namespace

double potential_integral(const Nonlinearity& nl, const FeField& u) {
  const MeshInterval& mesh = u.mesh();
  const QuadratureRule& q = gauss4();
  const double h = mesh.h();
  double total = 0.0;
  for (int e = 0; e < mesh.n_elem(); ++e) {
    const double ul = u.vertex_value(e);
    const double ur = u.vertex_value(e + 1);
    double local = 0.0;
    for (int g = 0; g < q.size(); ++g) {
      const double xi = q.points[g];
      const double x = mesh.vertex(e) + xi * h;
      const double t = (1.0 - xi) * ul + xi * ur;
      const double val = nl.F(x, t);
      if (!std::isfinite(val)) non_finite("F", x, t);
      local += q.weights[g] * val;
    }
    total += h * local;
  }
  return total;
}

Eigen::VectorXd nonlinear_load(const Nonlinearity& nl, const FeField& u) {
  const MeshInterval& mesh = u.mesh();
  const QuadratureRule& q = gauss4();
  const double h = mesh.h();
  const int n = mesh.dofs();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int e = 0; e < mesh.n_elem(); ++e) {
    const double ul = u.vertex_value(e);
    const double ur = u.vertex_value(e + 1);
    double left = 0.0, right = 0.0;
    for (int g = 0; g < q.size(); ++g) {
      const double xi = q.points[g];
      const double x = mesh.vertex(e) + xi * h;
      const double t = (1.0 - xi) * ul + xi * ur;
      const double val = nl.f(x, t);
      if (!std::isfinite(val)) non_finite("f", x, t);
      left += q.weights[g] * val * (1.0 - xi);
      right += q.weights[g] * val * xi;
    }
    if (e - 1 >= 0) out[e - 1] += h * left;
    if (e < n) out[e] += h * right;
  }
  return out;
}

double J_eval(const OperatorSystem& sys, const Nonlinearity& nl, const FeField& u) {
  require_same_mesh(sys.mesh(), u);
  return 0.5 * u.coeffs().dot(sys.apply_form(u.coeffs())) - potential_integral(nl, u);
}

Eigen::VectorXd J_gradient_vector(const OperatorSystem& sys, const Nonlinearity& nl, const FeField& u) {
  require_same_mesh(sys.mesh(), u);
  return sys.apply_form(u.coeffs()) - nonlinear_load(nl, u);
}

FeField J_gradient(const OperatorSystem& sys, const Nonlinearity& nl, const FeField& u) {
  return FeField(sys.mesh(), J_gradient_vector(sys, nl, u));
}

TridiagonalMatrix nonlinear_jacobian(const Nonlinearity& nl, const FeField& u) {
  const MeshInterval& mesh = u.mesh();
  const QuadratureRule& q = gauss4();
  const double h = mesh.h();
  const int n = mesh.dofs();
  TridiagonalMatrix m{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(std::max(n - 1, 0))};
  for (int e = 0; e < mesh.n_elem(); ++e) {
    const double ul = u.vertex_value(e);
    const double ur = u.vertex_value(e + 1);
    double m00 = 0.0, m01 = 0.0, m11 = 0.0;
    for (int g = 0; g < q.size(); ++g) {
      const double xi = q.points[g];
      const double x = mesh.vertex(e) + xi * h;
      const double t = (1.0 - xi) * ul + xi * ur;
      const double w = q.weights[g] * h * nl.df(x, t);
      if (!std::isfinite(w)) non_finite("df/dt", x, t);
      m00 += w * (1.0 - xi) * (1.0 - xi);
      m01 += w * (1.0 - xi) * xi;
      m11 += w * xi * xi;
    }
    if (e - 1 >= 0) m.diag[e - 1] += m00;
    if (e < n) m.diag[e] += m11;
    if (e - 1 >= 0 && e < n) m.off[e - 1] += m01;
  }
  return m;
}

Eigen::MatrixXd J_hessian(const OperatorSystem& sys, const Nonlinearity& nl, const FeField& u) {
  require_same_mesh(sys.mesh(), u);
  return sys.form_matrix() - nonlinear_jacobian(nl, u).dense();
}

}  // namespace mixedop
