#pragma once

#include "algh/smooth/field.hpp"

namespace algh {

struct ValueDerivative {
  double value;
  double derivative;
};

// Exact derivative of component `comp` along coordinate `direction`
// (x^i for direction < m, p_{direction-m} otherwise).
ValueDerivative dual_eval(const Field& f, const PhasePoint& at, int direction, int comp = 0);

// Central difference (f(q + h e) - f(q - h e)) / 2h; the oracle.
double fd_derivative(const Field& f, const PhasePoint& at, int direction, double step, int comp = 0);

// cbrt(machine eps) * max(1, |q_k|).
double fd_step(const PhasePoint& at, int direction);

// Named accessors of a scalar field.
double d_dx(const Field& f, const PhasePoint& at, int i);
double d_dp(const Field& f, const PhasePoint& at, int a);
double d2_dpdp(const Field& f, const PhasePoint& at, int a, int b);
double d2_dxdp(const Field& f, const PhasePoint& at, int i, int a);

}  // namespace algh
