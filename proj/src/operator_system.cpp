#include "mixedop/operator_system.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace mixedop {

OperatorSystem::OperatorSystem(const MeshInterval& mesh, double alpha, double s, const GagliardoOptions& options)
    : OperatorSystem(mesh, alpha, s, assemble_local_stiffness(mesh),
                     std::make_shared<const Eigen::MatrixXd>(assemble_gagliardo(mesh, s, options)), assemble_mass(mesh)) {}

OperatorSystem::OperatorSystem(const MeshInterval& mesh, double alpha, double s, TridiagonalMatrix stiffness,
                               std::shared_ptr<const Eigen::MatrixXd> gagliardo, TridiagonalMatrix mass)
    : mesh_(mesh),
      alpha_(alpha),
      s_(s),
      stiffness_(std::move(stiffness)),
      gagliardo_(std::move(gagliardo)),
      mass_(std::move(mass)) {}

OperatorSystem OperatorSystem::with_alpha(double alpha) const {
  return OperatorSystem(mesh_, alpha, s_, stiffness_, gagliardo_, mass_);
}

Eigen::MatrixXd OperatorSystem::form_matrix() const {
  Eigen::MatrixXd a = alpha_ * (*gagliardo_);
  for (int i = 0; i < dofs(); ++i) {
    a(i, i) += stiffness_.diag[i];
    if (i + 1 < dofs()) {
      a(i, i + 1) += stiffness_.off[i];
      a(i + 1, i) += stiffness_.off[i];
    }
  }
  return a;
}

Eigen::VectorXd OperatorSystem::apply_form(const Eigen::VectorXd& u) const {
  Eigen::VectorXd out = stiffness_.apply(u);
  if (alpha_ != 0.0) out.noalias() += alpha_ * ((*gagliardo_) * u);
  return out;
}

double OperatorSystem::dual_norm(const Eigen::VectorXd& g) const {
  return std::sqrt(std::max(0.0, g.dot(stiffness_.solve(g))));
}

double bilinear_B(const OperatorSystem& sys, const FeField& u, const FeField& v) {
  require_same_mesh(sys.mesh(), u);
  require_same_mesh(sys.mesh(), v);
  return u.coeffs().dot(sys.apply_form(v.coeffs()));
}

FieldNorms norms(const FeField& u, const OperatorSystem& sys) {
  require_same_mesh(sys.mesh(), u);
  const Eigen::VectorXd& c = u.coeffs();
  FieldNorms out;
  out.x = std::sqrt(std::max(0.0, sys.stiffness().quadratic(c, c)));
  out.l2 = std::sqrt(std::max(0.0, sys.mass().quadratic(c, c)));
  out.gagliardo = std::sqrt(std::max(0.0, c.dot(sys.gagliardo() * c)));
  return out;
}

}  // namespace mixedop
