#include "mixedop/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "mixedop/error.hpp"
#include "mixedop/quadrature.hpp"

namespace mixedop {

TridiagonalMatrix assemble_local_stiffness(const MeshInterval& mesh) {
  const int n = mesh.dofs();
  const double h = mesh.h();
  TridiagonalMatrix k;
  k.diag = Eigen::VectorXd::Constant(n, 2.0 / h);
  k.off = Eigen::VectorXd::Constant(std::max(n - 1, 0), -1.0 / h);
  return k;
}

TridiagonalMatrix assemble_mass(const MeshInterval& mesh) {
  const int n = mesh.dofs();
  const double h = mesh.h();
  TridiagonalMatrix m;
  m.diag = Eigen::VectorXd::Constant(n, 4.0 * h / 6.0);
  m.off = Eigen::VectorXd::Constant(std::max(n - 1, 0), h / 6.0);
  return m;
}

TridiagonalMatrix assemble_weighted_mass(const MeshInterval& mesh, const std::function<double(double)>& weight) {
  const int n = mesh.dofs();
  const double h = mesh.h();
  const QuadratureRule& q = gauss4();
  TridiagonalMatrix m;
  m.diag = Eigen::VectorXd::Zero(n);
  m.off = Eigen::VectorXd::Zero(std::max(n - 1, 0));
  for (int e = 0; e < mesh.n_elem(); ++e) {
    double m00 = 0.0, m01 = 0.0, m11 = 0.0;
    for (int g = 0; g < q.size(); ++g) {
      const double xi = q.points[g];
      const double w = q.weights[g] * h * weight(mesh.vertex(e) + xi * h);
      m00 += w * (1.0 - xi) * (1.0 - xi);
      m01 += w * (1.0 - xi) * xi;
      m11 += w * xi * xi;
    }
    // Element e joins vertices e and e+1, i.e. dofs e-1 and e.
    const int left = e - 1;
    const int right = e;
    if (left >= 0) m.diag[left] += m00;
    if (right < n) m.diag[right] += m11;
    if (left >= 0 && right < n) m.off[left] += m01;
  }
  return m;
}

namespace {

constexpr int kSlots = 4;
using LocalBlock = std::array<double, kSlots * kSlots>;

// Hat restricted to an element, in the local coordinate t in [0,1]:
// offset 0 is the falling half, offset 1 the rising half.
double hat(int offset, double t) { return offset == 0 ? 1.0 - t : t; }

// Slot of a vertex, given its offset from the left element of a pair with gap d.
int slot_of(int offset, int gap) {
  if (gap <= 1) return (offset >= 0 && offset <= gap + 1) ? offset : -1;
  if (offset == 0 || offset == 1) return offset;
  if (offset == gap || offset == gap + 1) return 2 + offset - gap;
  return -1;
}

int slot_count(int gap) { return gap == 0 ? 2 : (gap == 1 ? 3 : 4); }

// Offset (relative to the left element) of each slot.
int offset_of_slot(int slot, int gap) {
  if (gap <= 1 || slot < 2) return slot;
  return gap + slot - 2;
}

struct PairTable {
  std::vector<LocalBlock> value;
  std::vector<LocalBlock> error;
};

// Difference D_v(x, y) = phi_v(x) - phi_v(y) for x in the left element (local xi),
// y in the right element (local eta), pair gap d >= 1.
double pair_difference(int offset, int gap, double xi, double eta) {
  double v = 0.0;
  if (offset == 0 || offset == 1) v += hat(offset, xi);
  const int right = offset - gap;
  if (right == 0 || right == 1) v -= hat(right, eta);
  return v;
}

// Integrals over one element pair, scaled by h^{1-2s}, for a given gap.
void local_pair_integrals(int gap, double s, const QuadratureRule& rule, LocalBlock& out) {
  out.fill(0.0);
  const int slots = slot_count(gap);
  if (gap == 0) {
    // D_v = g_v (x - y) with slopes -1/h, +1/h; int_0^1 int_0^1 |x-y|^{1-2s} = 2/((2-2s)(3-2s)).
    const double base = 2.0 / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        out[a * kSlots + b] = (a == b ? 1.0 : -1.0) * base;
      }
    }
    return;
  }
  if (gap == 1) {
    // Corner coordinates at the shared vertex: xi = 1 - sigma, eta = tau. Each
    // difference is homogeneous of degree one in (sigma, tau); splitting the unit
    // square along sigma = tau and substituting (rho, rho w) makes the radial
    // integral int_0^1 rho^{2-2s} = 1/(3-2s) exact.
    const double radial = 1.0 / (3.0 - 2.0 * s);
    for (int g = 0; g < rule.size(); ++g) {
      const double w = rule.points[g];
      const double kernel = rule.weights[g] * std::pow(1.0 + w, -1.0 - 2.0 * s) * radial;
      std::array<double, 3> lower{}, upper{};
      for (int a = 0; a < slots; ++a) {
        lower[a] = pair_difference(a, 1, 1.0 - 1.0, w);   // sigma = 1, tau = w
        upper[a] = pair_difference(a, 1, 1.0 - w, 1.0);   // sigma = w, tau = 1
      }
      for (int a = 0; a < slots; ++a) {
        for (int b = 0; b < slots; ++b) {
          out[a * kSlots + b] += kernel * (lower[a] * lower[b] + upper[a] * upper[b]);
        }
      }
    }
    return;
  }
  for (int gx = 0; gx < rule.size(); ++gx) {
    const double xi = rule.points[gx];
    for (int gy = 0; gy < rule.size(); ++gy) {
      const double eta = rule.points[gy];
      const double kernel = rule.weights[gx] * rule.weights[gy] * std::pow(gap + eta - xi, -1.0 - 2.0 * s);
      std::array<double, kSlots> diff{};
      for (int a = 0; a < slots; ++a) diff[a] = pair_difference(offset_of_slot(a, gap), gap, xi, eta);
      for (int a = 0; a < slots; ++a) {
        for (int b = 0; b < slots; ++b) out[a * kSlots + b] += kernel * diff[a] * diff[b];
      }
    }
  }
}

PairTable build_pair_table(int n_elem, double s, Execution execution) {
  PairTable table;
  table.value.resize(static_cast<std::size_t>(n_elem));
  table.error.resize(static_cast<std::size_t>(n_elem));
  const QuadratureRule& coarse = gauss10();
  const QuadratureRule& fine = gauss15();
#pragma omp parallel for schedule(static) if (execution == Execution::parallel)
  for (int d = 0; d < n_elem; ++d) {
    LocalBlock lo{}, hi{};
    local_pair_integrals(d, s, coarse, lo);
    local_pair_integrals(d, s, fine, hi);
    table.value[static_cast<std::size_t>(d)] = lo;
    for (int k = 0; k < kSlots * kSlots; ++k) table.error[static_cast<std::size_t>(d)][k] = std::abs(hi[k] - lo[k]);
  }
  return table;
}

// int_0^1 P(t) t^{-2s} dt for a quadratic P given by its values at 0, 1/2, 1.
double singular_quadratic_moment(double p0, double phalf, double p1, double s) {
  const double q0 = p0;
  const double q2 = 2.0 * (p0 - 2.0 * phalf + p1);
  const double q1 = p1 - q0 - q2;
  // q0 vanishes whenever the hat product vanishes at the singular vertex, which
  // is the only case the assembler uses; the guard avoids 0/0 at s = 1/2.
  const double constant = q0 == 0.0 ? 0.0 : q0 / (1.0 - 2.0 * s);
  return constant + q1 / (2.0 - 2.0 * s) + q2 / (3.0 - 2.0 * s);
}

struct Moment {
  double value = 0.0;
  double error = 0.0;
};

class GagliardoAssembler {
 public:
  GagliardoAssembler(const MeshInterval& mesh, double s, Execution execution)
      : mesh_(mesh), s_(s), scale_(std::pow(mesh.h(), 1.0 - 2.0 * s)), table_(build_pair_table(mesh.n_elem(), s, execution)) {}

  // Element-pair integral I_pq[v, w] (x in E_p, y in E_q), symmetric in (p, q).
  Moment pair(int p, int q, int v, int w) const {
    const int lo = std::min(p, q);
    const int gap = std::abs(p - q);
    const int sv = slot_of(v - lo, gap);
    const int sw = slot_of(w - lo, gap);
    if (sv < 0 || sw < 0) return {};
    const auto idx = static_cast<std::size_t>(gap);
    return {scale_ * table_.value[idx][sv * kSlots + sw], scale_ * table_.error[idx][sv * kSlots + sw]};
  }

  // int_{E_p} phi_v phi_w |x - x_c|^{-2s} dx, c a vertex index.
  Moment tail_moment(int p, int v, int w, int c) const {
    const int ov = v - p;
    const int ow = w - p;
    if (ov < 0 || ov > 1 || ow < 0 || ow > 1) return {};
    auto product = [&](double t) { return hat(ov, t) * hat(ow, t); };
    if (c == p) {
      return {scale_ * singular_quadratic_moment(product(0.0), product(0.5), product(1.0), s_), 0.0};
    }
    if (c == p + 1) {
      return {scale_ * singular_quadratic_moment(product(1.0), product(0.5), product(0.0), s_), 0.0};
    }
    const double shift = static_cast<double>(c - p);
    auto integrate = [&](const QuadratureRule& rule) {
      double acc = 0.0;
      for (int g = 0; g < rule.size(); ++g) {
        const double t = rule.points[g];
        acc += rule.weights[g] * product(t) * std::pow(std::abs(t - shift), -2.0 * s_);
      }
      return acc;
    };
    const double lo = integrate(gauss10());
    const double hi = integrate(gauss15());
    return {scale_ * lo, scale_ * std::abs(hi - lo)};
  }

  // Vertices v <= w, both interior (1..n_elem-1).
  void entry(int v, int w, double& interior, double& exterior, double& error) const {
    interior = 0.0;
    exterior = 0.0;
    error = 0.0;
    const int n = mesh_.n_elem();
    auto add = [&](double& target, const Moment& m, double factor) {
      target += factor * m.value;
      error += std::abs(factor) * m.error;
    };
    if (w - v >= 2) {
      for (int p = v - 1; p <= v; ++p) {
        for (int q = w - 1; q <= w; ++q) add(interior, pair(p, q, v, w), 2.0);
      }
    } else {
      const int first = v - 1;
      const int last = w;  // elements first..last cover both supports
      for (int p = first; p <= last; ++p) {
        for (int q = first; q <= last; ++q) add(interior, pair(p, q, v, w), 1.0);
      }
      // y outside the union of supports but inside Omega: the difference
      // product reduces to phi_v(x) phi_w(x) and the y-integral is closed form.
      const int left = first;     // vertex index of the left end
      const int right = last + 1;  // vertex index of the right end
      const double f = 2.0 / (2.0 * s_);
      for (int p = first; p <= last; ++p) {
        if (left > 0) {
          add(interior, tail_moment(p, v, w, left), f);
          add(interior, tail_moment(p, v, w, 0), -f);
        }
        if (right < n) {
          add(interior, tail_moment(p, v, w, right), f);
          add(interior, tail_moment(p, v, w, n), -f);
        }
      }
      for (int p = std::max(v - 1, w - 1); p <= std::min(v, w); ++p) {
        add(exterior, tail_moment(p, v, w, 0), f);
        add(exterior, tail_moment(p, v, w, n), f);
      }
    }
  }

 private:
  MeshInterval mesh_;
  double s_;
  double scale_;
  PairTable table_;
};

}  // namespace

GagliardoMatrices assemble_gagliardo_parts(const MeshInterval& mesh, double s, const GagliardoOptions& options) {
  if (!(s > 0.0 && s < 1.0)) {
    throw DomainError("fractional order s must satisfy s in (0,1), got " + std::to_string(s));
  }
  const GagliardoAssembler assembler(mesh, s, options.execution);
  const int n = mesh.dofs();
  GagliardoMatrices out;
  out.interior = Eigen::MatrixXd::Zero(n, n);
  out.exterior = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd error = Eigen::MatrixXd::Zero(n, n);

#pragma omp parallel for schedule(dynamic, 4) if (options.execution == Execution::parallel)
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double in = 0.0, ex = 0.0, err = 0.0;
      assembler.entry(i + 1, j + 1, in, ex, err);
      out.interior(i, j) = in;
      out.interior(j, i) = in;
      out.exterior(i, j) = ex;
      out.exterior(j, i) = ex;
      error(i, j) = err;
    }
  }

  const double diag_max = (out.interior + out.exterior).diagonal().cwiseAbs().maxCoeff();
  Eigen::Index ei = 0, ej = 0;
  out.error_estimate = error.maxCoeff(&ei, &ej);
  if (out.error_estimate > options.tolerance * diag_max) {
    throw QuadratureError(static_cast<int>(ei), static_cast<int>(ej), out.error_estimate,
                          "Gagliardo quadrature did not converge at entry (" + std::to_string(ei) + "," +
                              std::to_string(ej) + "): error estimate " + std::to_string(out.error_estimate));
  }
  return out;
}

Eigen::MatrixXd assemble_gagliardo(const MeshInterval& mesh, double s, const GagliardoOptions& options) {
  return assemble_gagliardo_parts(mesh, s, options).total();
}

}  // namespace mixedop
