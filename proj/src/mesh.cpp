#include "mixedop/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mixedop/error.hpp"

namespace mixedop {

MeshInterval::MeshInterval(double a, double b, int n_elem) : a_(a), b_(b), n_elem_(n_elem), h_(0.0) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(b > a)) {
    throw DomainError("degenerate domain: need finite a < b, got a=" + std::to_string(a) +
                      ", b=" + std::to_string(b));
  }
  if (n_elem < 2) {
    throw DomainError("n_elem must be >= 2, got " + std::to_string(n_elem));
  }
  h_ = (b - a) / n_elem;
}

double MeshInterval::vertex(int j) const {
  if (j == n_elem_) return b_;
  return a_ + j * h_;
}

std::vector<double> MeshInterval::nodes() const {
  std::vector<double> out(static_cast<std::size_t>(dofs()));
  for (int i = 0; i < dofs(); ++i) out[static_cast<std::size_t>(i)] = node(i);
  return out;
}

int MeshInterval::element_of(double x) const {
  const int e = static_cast<int>(std::floor((x - a_) / h_));
  return std::clamp(e, 0, n_elem_ - 1);
}

MeshInterval build_mesh(double a, double b, int n_elem) { return MeshInterval(a, b, n_elem); }

}  // namespace mixedop
