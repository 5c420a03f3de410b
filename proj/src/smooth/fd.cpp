#include "algh/smooth/fd.hpp"

#include <cmath>
#include <limits>

namespace algh {

namespace {

void check_direction(const Field& f, const PhasePoint& at, int direction) {
  const int n = static_cast<int>(at.x.size() + at.p.size());
  if (direction < 0 || direction >= n) throw ShapeError("derivative direction out of range");
  if (static_cast<int>(at.x.size()) != f.base_dim()) throw ShapeError("base point has the wrong dimension");
}

double coordinate(const PhasePoint& at, int k) {
  const int m = static_cast<int>(at.x.size());
  return k < m ? at.x[k] : at.p[k - m];
}

}  // namespace

ValueDerivative dual_eval(const Field& f, const PhasePoint& at, int direction, int comp) {
  check_direction(f, at, direction);
  using D = Dual<double>;
  const int m = static_cast<int>(at.x.size());
  Buf<D> xx(at.x.size()), pp(at.p.size());
  for (int i = 0; i < m; ++i) xx[i] = D(at.x[i], i == direction ? 1.0 : 0.0);
  for (std::size_t a = 0; a < at.p.size(); ++a) pp[a] = D(at.p[a], static_cast<int>(a) + m == direction ? 1.0 : 0.0);
  Buf<D> out = f.eval<D>(CSpan<D>(xx), CSpan<D>(pp));
  const D& z = out.at(static_cast<std::size_t>(comp));
  if (!is_finite(z)) throw NumericalDomainError("dual_eval: non-finite value or derivative");
  return {z.v, z.d};
}

double fd_derivative(const Field& f, const PhasePoint& at, int direction, double step, int comp) {
  check_direction(f, at, direction);
  if (!(step > 0.0)) throw std::invalid_argument("fd_derivative: step must be positive");
  const int m = static_cast<int>(at.x.size());
  PhasePoint plus = at, minus = at;
  if (direction < m) {
    plus.x[direction] += step;
    minus.x[direction] -= step;
  } else {
    plus.p[direction - m] += step;
    minus.p[direction - m] -= step;
  }
  auto value = [&](const PhasePoint& q) {
    Buf<double> v = f.eval<double>(CSpan<double>(q.x), CSpan<double>(q.p));
    return v.at(static_cast<std::size_t>(comp));
  };
  double d = (value(plus) - value(minus)) / (2.0 * step);
  if (!std::isfinite(d)) throw NumericalDomainError("fd_derivative: non-finite evaluation");
  return d;
}

double fd_step(const PhasePoint& at, int direction) {
  static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  return base * std::max(1.0, std::abs(coordinate(at, direction)));
}

double d_dx(const Field& f, const PhasePoint& at, int i) { return dual_eval(f, at, i).derivative; }

double d_dp(const Field& f, const PhasePoint& at, int a) {
  return dual_eval(f, at, static_cast<int>(at.x.size()) + a).derivative;
}

double d2_dpdp(const Field& f, const PhasePoint& at, int a, int b) {
  const int m = static_cast<int>(at.x.size());
  return second_partial<double>(f, CSpan<double>(at.x), CSpan<double>(at.p), m + a, m + b).dij;
}

double d2_dxdp(const Field& f, const PhasePoint& at, int i, int a) {
  const int m = static_cast<int>(at.x.size());
  return second_partial<double>(f, CSpan<double>(at.x), CSpan<double>(at.p), i, m + a).dij;
}

}  // namespace algh
