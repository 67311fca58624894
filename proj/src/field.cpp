#include "mixedop/field.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "mixedop/error.hpp"

namespace mixedop {

FeField::FeField(MeshInterval mesh, Eigen::VectorXd coeffs) : mesh_(mesh), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != mesh_.dofs()) {
    throw DomainError("field has " + std::to_string(coeffs_.size()) + " coefficients, mesh has " +
                      std::to_string(mesh_.dofs()) + " degrees of freedom");
  }
}

FeField FeField::zero(const MeshInterval& mesh) { return FeField(mesh, Eigen::VectorXd::Zero(mesh.dofs())); }

double FeField::vertex_value(int j) const {
  if (j <= 0 || j >= mesh_.n_elem()) return 0.0;
  return coeffs_[j - 1];
}

double FeField::operator()(double x) const {
  if (!(x > mesh_.a()) || !(x < mesh_.b())) return 0.0;
  const int e = mesh_.element_of(x);
  const double xi = (x - mesh_.vertex(e)) / mesh_.h();
  return (1.0 - xi) * vertex_value(e) + xi * vertex_value(e + 1);
}

void require_same_mesh(const MeshInterval& expected, const FeField& u) {
  if (!(u.mesh() == expected)) {
    throw DomainError("mesh mismatch: field lives on a different mesh");
  }
}

FeField interpolate(const std::function<double(double)>& g, const MeshInterval& mesh) {
  Eigen::VectorXd c(mesh.dofs());
  for (int i = 0; i < mesh.dofs(); ++i) {
    const double v = g(mesh.node(i));
    if (!std::isfinite(v)) {
      throw DomainError("non-finite sample at node " + std::to_string(i) + " (x=" + std::to_string(mesh.node(i)) + ")");
    }
    c[i] = v;
  }
  return FeField(mesh, std::move(c));
}

}  // namespace mixedop
