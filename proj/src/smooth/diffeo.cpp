#include "algh/smooth/diffeo.hpp"

#include <algorithm>
#include <cmath>

namespace algh {

std::vector<double> DiffeoMap::jacobian(const std::vector<double>& x) const {
  const int m = dim();
  std::vector<double> jac(static_cast<std::size_t>(m * m));
  for (int j = 0; j < m; ++j) {
    Buf<double> col = partial<double>(forward, CSpan<double>(x), CSpan<double>(), j);
    for (int i = 0; i < m; ++i) jac[i * m + j] = col[i];
  }
  return jac;
}

DiffeoMap identity_map(int m) {
  auto id = [](auto x, auto out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i];
  };
  Field f = make_base_field(m, Shape{m, 1, 1}, id);
  return {f, f};
}

DiffeoMap translation_map(std::vector<double> offset) {
  const int m = static_cast<int>(offset.size());
  auto shift = [](std::vector<double> t, double sign) {
    return [t = std::move(t), sign](auto x, auto out) {
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + sign * t[i];
    };
  };
  return {make_base_field(m, Shape{m, 1, 1}, shift(offset, 1.0)),
          make_base_field(m, Shape{m, 1, 1}, shift(offset, -1.0))};
}

double inverse_residual(const DiffeoMap& phi, const std::vector<std::vector<double>>& points) {
  double worst = 0.0;
  for (const auto& x : points) {
    std::vector<double> y = phi(phi.inv(x));
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(y[i] - x[i]));
  }
  return worst;
}

}  // namespace algh
