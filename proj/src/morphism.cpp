#include "algh/morphism.hpp"

#include <algorithm>
#include <cmath>

#include "algh/smooth/linalg.hpp"

namespace algh {

MorphismGH::MorphismGH(Field g, DiffeoMap h) : g_(std::move(g)), h_(std::move(h)) {
  const Shape& s = g_.shape();
  if (s.rows != s.cols || s.depth != 1 || g_.domain() != Domain::base) throw ShapeError("g must be a square base field");
  if (h_.dim() != g_.base_dim()) throw ShapeError("h must act on the base of g");
  g_h_ = compose_base(g_, h_.forward);
  gtilde_h_ = inverse_field<SingularMorphismError>(g_h_, "the morphism g is singular");
}

double MorphismGH::invertibility_residual(const std::vector<std::vector<double>>& points) const {
  const int n = r();
  double worst = 0.0;
  for (const auto& x : points) {
    auto g = g_h_.at_base(x);
    auto gt = gtilde_h_.at_base(x);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += gt[a * n + k] * g[k * n + b];
        worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
      }
  }
  return worst;
}

MorphismGH identity_morphism(int m, int r, DiffeoMap h) {
  std::vector<double> id(static_cast<std::size_t>(r * r), 0.0);
  for (int a = 0; a < r; ++a) id[a * r + a] = 1.0;
  return MorphismGH(constant_field(m, 0, Shape{r, r, 1}, id, Domain::base), std::move(h));
}

}  // namespace algh
