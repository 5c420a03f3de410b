#pragma once

#include <vector>

#include "algh/smooth/field.hpp"

namespace algh {

// A base-space diffeomorphism with a declared inverse; both are base fields
// of shape m.
struct DiffeoMap {
  Field forward;
  Field inverse;

  int dim() const { return forward.base_dim(); }
  std::vector<double> operator()(const std::vector<double>& x) const { return forward.at_base(x); }
  std::vector<double> inv(const std::vector<double>& y) const { return inverse.at_base(y); }
  // Row-major m x m Jacobian d forward^i / d x^j.
  std::vector<double> jacobian(const std::vector<double>& x) const;
};

DiffeoMap identity_map(int m);
DiffeoMap translation_map(std::vector<double> offset);

// max |forward(inverse(x)) - x| over the given points.
double inverse_residual(const DiffeoMap& phi, const std::vector<std::vector<double>>& points);

}  // namespace algh
