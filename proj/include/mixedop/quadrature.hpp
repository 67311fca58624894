#pragma once

#include <vector>

namespace mixedop {

/// Quadrature rule on the reference interval [0, 1].
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(points.size()); }
};

/// 4-point Gauss-Legendre; shared by the energy and its gradient.
const QuadratureRule& gauss4();
const QuadratureRule& gauss10();
const QuadratureRule& gauss15();

}  // namespace mixedop
