#pragma once

#include <memory>

#include <Eigen/Core>

#include "mixedop/assembly.hpp"
#include "mixedop/field.hpp"
#include "mixedop/mesh.hpp"
#include "mixedop/tridiagonal.hpp"

namespace mixedop {

/// Assembled K (local stiffness), S (Gagliardo form), M (mass) together with alpha and s.
/// Immutable; with_alpha() shares the assembled matrices.
class OperatorSystem {
 public:
  OperatorSystem(const MeshInterval& mesh, double alpha, double s, const GagliardoOptions& options = {});

  /// Builds a system from precomputed matrices (used by oracle tests and alpha sweeps).
  OperatorSystem(const MeshInterval& mesh, double alpha, double s, TridiagonalMatrix stiffness,
                 std::shared_ptr<const Eigen::MatrixXd> gagliardo, TridiagonalMatrix mass);

  OperatorSystem with_alpha(double alpha) const;

  const MeshInterval& mesh() const { return mesh_; }
  double alpha() const { return alpha_; }
  double s() const { return s_; }
  int dofs() const { return mesh_.dofs(); }

  const TridiagonalMatrix& stiffness() const { return stiffness_; }
  const Eigen::MatrixXd& gagliardo() const { return *gagliardo_; }
  const TridiagonalMatrix& mass() const { return mass_; }

  /// Dense K + alpha S, the matrix of B_alpha.
  Eigen::MatrixXd form_matrix() const;
  /// (K + alpha S) u without forming the dense sum.
  Eigen::VectorXd apply_form(const Eigen::VectorXd& u) const;

  /// sqrt(g^T K^{-1} g): dual norm of a functional g with respect to ||.||_X.
  double dual_norm(const Eigen::VectorXd& g) const;

 private:
  MeshInterval mesh_;
  double alpha_;
  double s_;
  TridiagonalMatrix stiffness_;
  std::shared_ptr<const Eigen::MatrixXd> gagliardo_;
  TridiagonalMatrix mass_;
};

/// B_alpha(u, v) = u^T (K + alpha S) v.
double bilinear_B(const OperatorSystem& sys, const FeField& u, const FeField& v);

struct FieldNorms {
  double x = 0.0;          ///< (u^T K u)^{1/2}
  double l2 = 0.0;         ///< (u^T M u)^{1/2}
  double gagliardo = 0.0;  ///< (u^T S u)^{1/2}
};

FieldNorms norms(const FeField& u, const OperatorSystem& sys);

}  // namespace mixedop
