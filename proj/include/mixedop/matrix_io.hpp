#pragma once

#include <iosfwd>

#include <Eigen/Core>

#include "mixedop/tridiagonal.hpp"

namespace mixedop {

// Plain-text matrix format.
//
//   line 1:  "<rows> <cols> dense"   or   "<rows> <cols> banded"
//   dense:   one line per row, all <cols> entries
//   banded:  one line per row with the entries of columns i-1, i, i+1
//            (columns outside the matrix are written as 0)
//
// Entries are space separated and printed with 17 significant digits so a
// read-back reproduces the doubles exactly.

void write_matrix(std::ostream& out, const Eigen::MatrixXd& dense);
void write_matrix(std::ostream& out, const TridiagonalMatrix& banded);

/// Reads either kind and returns the dense matrix. Throws DomainError on malformed input.
Eigen::MatrixXd read_matrix(std::istream& in);

}  // namespace mixedop
