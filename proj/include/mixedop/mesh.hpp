#pragma once

#include <vector>

namespace mixedop {

/// Uniform partition of (a, b) into n_elem elements.
///
/// Vertices are numbered 0..n_elem; vertex 0 and vertex n_elem sit on the
/// boundary and carry no degree of freedom (the field vanishes there and on
/// the whole exterior). Interior node i (0-based) is vertex i + 1.
class MeshInterval {
 public:
  /// Throws DomainError unless b > a and n_elem >= 2.
  MeshInterval(double a, double b, int n_elem);

  double a() const { return a_; }
  double b() const { return b_; }
  int n_elem() const { return n_elem_; }
  double h() const { return h_; }
  int dofs() const { return n_elem_ - 1; }

  double vertex(int j) const;
  /// Coordinate of interior node i, 0 <= i < dofs().
  double node(int i) const { return vertex(i + 1); }
  std::vector<double> nodes() const;

  /// Index of the element containing x (clamped to [0, n_elem)); x must lie in [a, b].
  int element_of(double x) const;

  bool operator==(const MeshInterval& other) const = default;

 private:
  double a_;
  double b_;
  int n_elem_;
  double h_;
};

MeshInterval build_mesh(double a, double b, int n_elem);

}  // namespace mixedop
