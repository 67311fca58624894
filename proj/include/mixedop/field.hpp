#pragma once

#include <functional>

#include <Eigen/Core>

#include "mixedop/mesh.hpp"

namespace mixedop {

/// Continuous piecewise-linear function on the mesh, zero outside (a, b).
/// Stored as its nodal values at the interior nodes.
class FeField {
 public:
  /// Throws DomainError when coeffs.size() != mesh.dofs().
  FeField(MeshInterval mesh, Eigen::VectorXd coeffs);

  static FeField zero(const MeshInterval& mesh);

  const MeshInterval& mesh() const { return mesh_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  int size() const { return static_cast<int>(coeffs_.size()); }

  /// Value of the piecewise-linear reconstruction at x (0 outside [a, b]).
  double operator()(double x) const;

  /// Nodal value at vertex j in 0..n_elem (boundary vertices are 0).
  double vertex_value(int j) const;

 private:
  MeshInterval mesh_;
  Eigen::VectorXd coeffs_;
};

/// Throws DomainError unless both fields live on the same mesh.
void require_same_mesh(const MeshInterval& expected, const FeField& u);

/// Nodal interpolant. A non-finite sample raises DomainError naming the node index.
FeField interpolate(const std::function<double(double)>& g, const MeshInterval& mesh);

}  // namespace mixedop
