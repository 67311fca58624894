#pragma once

#include <Eigen/Core>

#include "mixedop/field.hpp"
#include "mixedop/nonlinearity.hpp"
#include "mixedop/operator_system.hpp"
#include "mixedop/tridiagonal.hpp"

namespace mixedop {

/// int_Omega F(x, u_h(x)) dx, 4-point Gauss per element on the P1 reconstruction.
/// Throws NumericalError at the first non-finite F.
double potential_integral(const Nonlinearity& nl, const FeField& u);

/// Vector of int_Omega f(x, u_h(x)) phi_i dx with the same rule as potential_integral.
Eigen::VectorXd nonlinear_load(const Nonlinearity& nl, const FeField& u);

/// J(u) = 1/2 u^T (K + alpha S) u - int F(x, u_h).
double J_eval(const OperatorSystem& sys, const Nonlinearity& nl, const FeField& u);

/// Coefficients of J'(u)(phi_i); the exact gradient of J_eval in nodal coordinates.
Eigen::VectorXd J_gradient_vector(const OperatorSystem& sys, const Nonlinearity& nl, const FeField& u);

/// J'(u)(phi_i) packaged on the mesh of u (a dual vector, not a function).
FeField J_gradient(const OperatorSystem& sys, const Nonlinearity& nl, const FeField& u);

/// int d_t f(x, u_h) phi_i phi_j dx.
TridiagonalMatrix nonlinear_jacobian(const Nonlinearity& nl, const FeField& u);

/// Hessian of J in nodal coordinates: K + alpha S - int d_t f(x, u_h) phi_i phi_j.
Eigen::MatrixXd J_hessian(const OperatorSystem& sys, const Nonlinearity& nl, const FeField& u);

}  // namespace mixedop
