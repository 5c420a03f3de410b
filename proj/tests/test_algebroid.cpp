#include <cmath>

#include "algh/algebroid.hpp"
#include "algh/smooth/fd.hpp"
#include "algh/smooth/probes.hpp"
#include "doctest.h"

using namespace algh;

namespace {

Field levi_civita(double corrupt = 0.0) {
  return make_base_field(1, Shape{3, 3, 3}, [corrupt](auto x, auto out) {
    using T = typename decltype(out)::value_type;
    for (auto& o : out) o = T(0.0) + 0.0 * x[0];
    auto at = [](int g, int a, int b) { return (g * 3 + a) * 3 + b; };
    // L^c_{ab} = eps_{abc}
    out[at(2, 0, 1)] = T(1.0 + corrupt);
    out[at(2, 1, 0)] = T(-1.0);
    out[at(0, 1, 2)] = T(1.0);
    out[at(0, 2, 1)] = T(-1.0);
    out[at(1, 2, 0)] = T(1.0);
    out[at(1, 0, 2)] = T(-1.0);
  });
}

AlgebroidModel so3(double corrupt = 0.0) {
  return AlgebroidModel(1, 3, constant_field(1, 0, Shape{1, 3, 1}, {0, 0, 0}, Domain::base), levi_civita(corrupt),
                        identity_map(1), identity_map(1));
}

AlgebroidModel tangent(int m) {
  std::vector<double> id(static_cast<std::size_t>(m * m), 0.0);
  for (int i = 0; i < m; ++i) id[i * m + i] = 1.0;
  return AlgebroidModel(m, m, constant_field(m, 0, Shape{m, m, 1}, id, Domain::base),
                        constant_field(m, 0, Shape{m, m, m}, std::vector<double>(m * m * m, 0.0), Domain::base),
                        identity_map(m), identity_map(m));
}

AlgebroidModel deformed() {
  Field rho = make_base_field(2, Shape{2, 2, 1}, [](auto y, auto out) {
    out[0] = 1.0 + 0.25 * y[0] * y[0];
    out[1] = 0.0 * y[0];
    out[2] = 0.0 * y[0];
    out[3] = 1.0 + 0.1 * y[1] * y[1];
  });
  return AlgebroidModel(2, 2, rho, constant_field(2, 0, Shape{2, 2, 2}, std::vector<double>(8, 0.0), Domain::base),
                        translation_map({0.3, -0.7}), identity_map(2));
}

}  // namespace

TEST_CASE("so3 basis brackets follow the structure constants") {
  AlgebroidModel model = so3();
  auto b = bracket(model, basis_section(model, 0), basis_section(model, 1)).at_base({0.2});
  CHECK(b == std::vector<double>{0, 0, 1});
  auto c = bracket(model, basis_section(model, 2), basis_section(model, 0)).at_base({-0.4});
  CHECK(c == std::vector<double>{0, 1, 0});
}

TEST_CASE("bracket of a section with itself vanishes") {
  for (const AlgebroidModel& model : {so3(), tangent(2), deformed()}) {
    Section u = random_polynomial_field(model.m(), Shape{model.r(), 1, 1}, 11);
    for (const auto& x : base_probes(model.m(), 20, kDefaultSeed))
      for (double v : bracket(model, u, u).at_base(x)) CHECK(v == 0.0);
  }
}

TEST_CASE("tangent algebroid bracket is the vector field commutator") {
  AlgebroidModel model = tangent(2);
  Section u = make_base_field(2, Shape{2, 1, 1}, [](auto x, auto out) {
    out[0] = x[1] * x[1];
    out[1] = sin(x[0]);
  });
  Section v = make_base_field(2, Shape{2, 1, 1}, [](auto x, auto out) {
    out[0] = x[0] * x[1];
    out[1] = 1.0 + x[0] * x[0];
  });
  Section uv = bracket(model, u, v);
  for (const auto& x : base_probes(2, 50, kDefaultSeed)) {
    double x1 = x[0], x2 = x[1];
    double c1 = x2 * x2 * x2 + x1 * std::sin(x1) - 2.0 * x2 * (1.0 + x1 * x1);
    double c2 = 2.0 * x1 * x2 * x2 - x1 * x2 * std::cos(x1);
    auto got = uv.at_base(x);
    CHECK(std::abs(got[0] - c1) <= 1e-10);
    CHECK(std::abs(got[1] - c2) <= 1e-10);
  }
}

TEST_CASE("bracket is bilinear") {
  AlgebroidModel model = deformed();
  Section u = random_polynomial_field(2, Shape{2, 1, 1}, 1);
  Section v = random_polynomial_field(2, Shape{2, 1, 1}, 2);
  Section w = random_polynomial_field(2, Shape{2, 1, 1}, 3);
  Section vw = linear_combination(2.0, v, -3.0, w);
  for (const auto& x : base_probes(2, 20, kDefaultSeed)) {
    auto lhs = bracket(model, u, vw).at_base(x);
    auto a = bracket(model, u, v).at_base(x);
    auto b = bracket(model, u, w).at_base(x);
    for (int g = 0; g < 2; ++g) CHECK(std::abs(lhs[g] - (2.0 * a[g] - 3.0 * b[g])) <= 1e-12);
  }
}

TEST_CASE("check_axioms on builtin-style models") {
  AxiomReport s = check_axioms(so3(), 100, kDefaultSeed);
  CHECK(s.passed());
  CHECK(s.antisymmetry == 0.0);
  CHECK(s.jacobi <= 1e-12);
  CHECK(s.leibniz <= 1e-12);

  AxiomReport t = check_axioms(tangent(2), 100, kDefaultSeed);
  CHECK(t.passed());
  CHECK(t.anchor_compatibility == 0.0);

  AxiomReport d = check_axioms(deformed(), 100, kDefaultSeed);
  CHECK(d.passed());
  CHECK(d.anchor_compatibility <= 1e-8);
  CHECK(d.leibniz <= 1e-8);
  CHECK(d.jacobi <= 1e-7);
}

TEST_CASE("corrupted so3 fails the axioms") {
  AxiomReport c = check_axioms(so3(0.1), 100, kDefaultSeed);
  CHECK_FALSE(c.passed());
  CHECK(std::max(c.jacobi, c.antisymmetry) > 1e-3);
  // at least the perturbation itself shows up in L^3_12 + L^3_21
  CHECK(c.antisymmetry >= 0.1 - 1e-15);
}

TEST_CASE("check_axioms rejects an empty probe set") {
  CHECK_THROWS_AS(check_axioms(so3(), 0, kDefaultSeed), std::invalid_argument);
}

TEST_CASE("composed_anchor") {
  Field f = random_polynomial_field(1, Shape{}, 5);
  CHECK(composed_anchor(so3(), basis_section(so3(), 1), f, {0.3}) == 0.0);

  AlgebroidModel tm = tangent(2);
  Field x1 = make_base_field(2, Shape{}, [](auto x, auto out) { out[0] = x[0]; });
  for (const auto& x : base_probes(2, 10, kDefaultSeed)) CHECK(composed_anchor(tm, basis_section(tm, 0), x1, x) == 1.0);

  // Left side of the anchor identity through h: rho at h(x) applied to a
  // finite-difference gradient of f at h(x) (h is a translation, Dh = I).
  AlgebroidModel dm = deformed();
  Field g = make_base_field(2, Shape{}, [](auto y, auto out) { out[0] = sin(y[0]) * y[1] + y[0] * y[0] * y[1]; });
  Section u = random_polynomial_field(2, Shape{2, 1, 1}, 9);
  for (const auto& x : base_probes(2, 30, kDefaultSeed)) {
    auto y = dm.h()(x);
    auto R = dm.rho().at_base(y);
    auto uy = u.at_base(y);
    PhasePoint q{y, {}};
    double expect = 0.0;
    for (int i = 0; i < 2; ++i) {
      double grad = fd_derivative(g, q, i, fd_step(q, i));
      for (int a = 0; a < 2; ++a) expect += R[i * 2 + a] * uy[a] * grad;
    }
    CHECK(std::abs(composed_anchor(dm, u, g, x) - expect) <= 1e-5);
  }
}

TEST_CASE("model construction validates shapes") {
  CHECK_THROWS_AS(AlgebroidModel(1, 3, constant_field(1, 0, Shape{1, 2, 1}, {0, 0}, Domain::base), levi_civita(),
                                 identity_map(1), identity_map(1)),
                  ShapeError);
  AlgebroidModel model = so3();
  CHECK_THROWS_AS(bracket(model, basis_section(model, 0), random_polynomial_field(1, Shape{2, 1, 1}, 1)), ShapeError);
  CHECK_THROWS_AS(basis_section(model, 3), ShapeError);
}
