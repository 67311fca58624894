#include "mixedop/matrix_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "mixedop/error.hpp"

namespace mixedop {
namespace {

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

void write_matrix(std::ostream& out, const Eigen::MatrixXd& dense) {
  out << dense.rows() << ' ' << dense.cols() << " dense\n";
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (j) out << ' ';
      put(out, dense(i, j));
    }
    out << '\n';
  }
}

void write_matrix(std::ostream& out, const TridiagonalMatrix& banded) {
  const int n = banded.size();
  out << n << ' ' << n << " banded\n";
  for (int i = 0; i < n; ++i) {
    put(out, i > 0 ? banded.off[i - 1] : 0.0);
    out << ' ';
    put(out, banded.diag[i]);
    out << ' ';
    put(out, i + 1 < n ? banded.off[i] : 0.0);
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix(std::istream& in) {
  long rows = 0, cols = 0;
  std::string kind;
  if (!(in >> rows >> cols >> kind) || rows < 0 || cols < 0) throw DomainError("matrix dump: bad header");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, cols);
  if (kind == "dense") {
    for (long i = 0; i < rows; ++i)
      for (long j = 0; j < cols; ++j)
        if (!(in >> a(i, j))) throw DomainError("matrix dump: truncated dense body");
  } else if (kind == "banded") {
    if (rows != cols) throw DomainError("matrix dump: banded matrix must be square");
    for (long i = 0; i < rows; ++i) {
      double lo = 0, d = 0, up = 0;
      if (!(in >> lo >> d >> up)) throw DomainError("matrix dump: truncated banded body");
      if (i > 0) a(i, i - 1) = lo;
      a(i, i) = d;
      if (i + 1 < cols) a(i, i + 1) = up;
    }
  } else {
    throw DomainError("matrix dump: unknown kind '" + kind + "'");
  }
  return a;
}

}  // namespace mixedop
