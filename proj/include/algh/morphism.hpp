#pragma once

#include <vector>

#include "algh/smooth/diffeo.hpp"
#include "algh/smooth/field.hpp"

namespace algh {

// The fiber morphism (g, h). g is an r x r base field on N with entries
// g[alpha][a]; everything on the phase space reads it through h.
class MorphismGH {
 public:
  MorphismGH(Field g, DiffeoMap h);

  int m() const { return g_.base_dim(); }
  int r() const { return g_.shape().rows; }
  const Field& g() const { return g_; }
  const DiffeoMap& h() const { return h_; }
  // g o h, entries [alpha][a].
  const Field& g_h() const { return g_h_; }
  // Pointwise inverse of g o h, entries [a][alpha]. Evaluation throws
  // SingularMorphismError where g o h is singular.
  const Field& gtilde_h() const { return gtilde_h_; }

  // max |gtilde . g - I| over the points.
  double invertibility_residual(const std::vector<std::vector<double>>& points) const;

 private:
  Field g_;
  DiffeoMap h_;
  Field g_h_;
  Field gtilde_h_;
};

MorphismGH identity_morphism(int m, int r, DiffeoMap h);

}  // namespace algh
