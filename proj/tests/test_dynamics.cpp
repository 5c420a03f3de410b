#include <cmath>

#include "algh/dynamics.hpp"
#include "algh/models.hpp"
#include "algh/smooth/probes.hpp"
#include "doctest.h"
#include "oracles/oracles.hpp"

using namespace algh;
using oracle::max_abs;
using oracle::max_abs_diff;

namespace {

std::vector<BuiltinModel> all_models() {
  std::vector<BuiltinModel> out;
  for (const auto& info : builtin_models()) out.push_back(make_model(info.name));
  return out;
}

Field random_block(int m, int r, std::uint64_t seed, double scale = 0.5) {
  return oracle::random_phase_polynomial(m, r, Shape{r, 1, 1}, seed, scale);
}

// Gamma_bc = sum_a k[b][c][a](x) p_a with quadratic-in-x coefficients.
PhaseConnection p_linear_connection(int m, int r, std::uint64_t seed) {
  Field k = random_polynomial_field(m, Shape{r, r, r}, seed, 0.4);
  return {make_phase_field(m, r, Shape{r, r, 1}, [k, r](auto x, auto p, auto out) {
    using T = typename decltype(out)::value_type;
    Buf<T> K = k.eval<T>(x, CSpan<T>());
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c) {
        T s(0.0);
        for (int a = 0; a < r; ++a) s += K[(b * r + c) * r + a] * p[a];
        out[b * r + c] = s;
      }
  })};
}

GeneralizedVector minus(const GeneralizedVector& a, const GeneralizedVector& b) {
  GeneralizedVector out = a;
  for (std::size_t k = 0; k < a.Z.size(); ++k) {
    out.Z[k] -= b.Z[k];
    out.Y[k] -= b.Y[k];
  }
  return out;
}

double max_abs(const GeneralizedVector& v) { return std::max(oracle::max_abs(v.Z), oracle::max_abs(v.Y)); }

// Phi[b][c] = gtilde[e][c] dF_b/dp_e by direct evaluation.
std::vector<double> phi_at(const MorphismGH& gh, const Field& F, const PhasePoint& q) {
  const int r = gh.r(), m = gh.m();
  auto gt = gh.gtilde_h()(q);
  std::vector<double> phi(static_cast<std::size_t>(r * r), 0.0);
  for (int e = 0; e < r; ++e) {
    auto dF = partial_field(F, m + e)(q);
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c) phi[b * r + c] += gt[e * r + c] * dF[b];
  }
  return phi;
}

}  // namespace

TEST_CASE("semispray stores the combined coefficient") {
  BuiltinModel mod = make_model("classical-metric");
  Field G = random_block(2, 2, 11);
  ExternalForce F{make_force(mod, "modulated")};
  Semispray s = Semispray::from_coefficients(mod.gh, F, G);
  for (const auto& q : phase_probes(2, 2, 20, kDefaultSeed)) {
    auto g = G(q), f = F.F(q), w = s.combined()(q);
    for (int a = 0; a < 2; ++a) CHECK(std::abs(w[a] + 2.0 * (g[a] - 0.25 * f[a])) <= 1e-14);
    CHECK(max_abs_diff(s.coefficients()(q), g) <= 1e-14);
    auto S = evaluate(s.field(), q);
    auto v = mod.gh.g_h()(q);
    CHECK(std::abs(S.Z[0] - (v[0] * q.p[0] + v[1] * q.p[1])) <= 1e-14);
    CHECK(max_abs_diff(S.Y, w) <= 0.0);
  }
  ExternalForce none = zero_force(2, 2);
  Semispray t = Semispray::from_combined(mod.gh, none, s.combined());
  PhasePoint q{{0.2, 0.1}, {0.3, -0.4}};
  CHECK(max_abs_diff(t.combined()(q), s.combined()(q)) == 0.0);
  CHECK(max_abs_diff(t.coefficients()(q), s.coefficients()(q)) > 1e-3);
  CHECK_THROWS_AS(Semispray::from_combined(mod.gh, none, random_block(2, 3, 1)), ShapeError);
}

TEST_CASE("connection from a semispray: closed examples") {
  BuiltinModel free = make_model("classical-free");
  Semispray zero = Semispray::from_coefficients(free.gh, zero_force(2, 2), zero_force(2, 2).F);
  const double gamma = 0.7;
  Field G = make_phase_field(2, 2, Shape{2, 1, 1}, [gamma](auto, auto p, auto out) {
    for (int b = 0; b < 2; ++b) out[b] = 0.5 * gamma * p[b] * p[b];
  });
  Semispray quad = Semispray::from_coefficients(free.gh, zero_force(2, 2), G);
  for (const auto& q : phase_probes(2, 2, 20, kDefaultSeed)) {
    CHECK(max_abs(connection_from_semispray(free.algebroid, zero).at(q)) == 0.0);
    // force-free Y-block -2G = -gamma p_b^2, so Gamma_bc = -gamma p_b delta_bc
    auto Gam = connection_from_semispray(free.algebroid, quad).at(q);
    std::vector<double> expect = {-gamma * q.p[0], 0.0, 0.0, -gamma * q.p[1]};
    CHECK(max_abs_diff(Gam, expect) <= 1e-14);
  }
}

TEST_CASE("the semispray connection realizes P = J[S, .] - [S, J .] = Id - 2V") {
  for (const auto& mod : all_models()) {
    const int m = mod.algebroid.m(), r = mod.algebroid.r();
    Semispray s = Semispray::from_combined(mod.gh, zero_force(m, r), random_block(m, r, 21));
    PhaseConnection conn = connection_from_semispray(mod.algebroid, s, true);
    EndomorphismField J = almost_tangent(mod.gh), V = vertical_projector(conn);
    GeneralizedVectorField S = s.field();
    double worst = 0.0;
    for (const auto& q : phase_probes(m, r, 20, kDefaultSeed))
      for (int k = 0; k < 2 * r; ++k) {
        GeneralizedVectorField X = natural_basis_field(m, r, k);
        GeneralizedVector lhs = minus(J(gt_bracket(mod.algebroid, S, X, q)), gt_bracket(mod.algebroid, S, J(X), q));
        GeneralizedVector x = evaluate(X, q), vx = V(x);
        for (int a = 0; a < r; ++a) {
          worst = std::max(worst, std::abs(lhs.Z[a] - (x.Z[a] - 2.0 * vx.Z[a])));
          worst = std::max(worst, std::abs(lhs.Y[a] - (x.Y[a] - 2.0 * vx.Y[a])));
        }
      }
    INFO(mod.name);
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("semispray connection obeys the connection change law") {
  for (const auto& mod : all_models()) {
    const int m = mod.algebroid.m(), r = mod.algebroid.r();
    FiberChange change = oracle::random_fiber_change(m, r, 31);
    ExternalForce F{random_block(m, r, 33, 0.3)};
    Semispray s = Semispray::from_combined(mod.gh, F, random_block(m, r, 32));
    AlgebroidModel model2 = transform_model(mod.algebroid, change);
    MorphismGH gh2 = transform_morphism(mod.gh, change);
    ExternalForce F2{vertical_components_in_new_frame(F.F, change)};
    Field W2 = oracle::semispray_block_in_new_frame(mod.algebroid, mod.gh, s.combined(), change);
    Semispray s2 = Semispray::from_combined(gh2, F2, W2);
    for (bool with_force : {false, true}) {
      PhaseConnection expect = transform_connection(mod.algebroid, connection_from_semispray(mod.algebroid, s, with_force),
                                                    change);
      PhaseConnection got = connection_from_semispray(model2, s2, with_force);
      double worst = 0.0;
      for (const auto& q : phase_probes(m, r, 30, kDefaultSeed)) worst = std::max(worst, max_abs_diff(got.at(q), expect.at(q)));
      INFO(mod.name << " include_force=" << with_force);
      CHECK(worst <= 1e-8);
    }
  }
}

TEST_CASE("force deformation of the adapted bases") {
  for (const auto& mod : all_models()) {
    const int m = mod.algebroid.m(), r = mod.algebroid.r();
    ExternalForce F{oracle::random_phase_polynomial(m, r, Shape{r, 1, 1}, 41, 0.5)};
    Semispray s = Semispray::from_combined(mod.gh, F, random_block(m, r, 42));
    PhaseConnection with = connection_from_semispray(mod.algebroid, s, true);
    PhaseConnection ring = connection_from_semispray(mod.algebroid, s, false);
    double worst = 0.0, worst_dual = 0.0;
    for (const auto& q : phase_probes(m, r, 40, kDefaultSeed)) {
      auto phi = phi_at(mod.gh, F.F, q);
      for (int c = 0; c < r; ++c) {
        auto d = adapted_horizontal(with, c, q), dr = adapted_horizontal(ring, c, q);
        for (int b = 0; b < r; ++b) worst = std::max(worst, std::abs(dr.Y[b] - (d.Y[b] - 0.25 * phi[b * r + c])));
        worst = std::max(worst, max_abs_diff(dr.Z, d.Z));
      }
      for (int b = 0; b < r; ++b) {
        auto w = dual_adapted(with, b, q), wr = dual_adapted(ring, b, q);
        for (int c = 0; c < r; ++c)
          worst_dual = std::max(worst_dual, std::abs(wr.zdual[c] - (w.zdual[c] + 0.25 * phi[b * r + c])));
        worst_dual = std::max(worst_dual, max_abs_diff(wr.pdual, w.pdual));
      }
      auto def = force_deformation(mod.gh, F)(q);
      for (int k = 0; k < r * r; ++k) worst = std::max(worst, std::abs(def[k] + 0.25 * phi[k]));
    }
    INFO(mod.name);
    CHECK(worst <= 1e-10);
    CHECK(worst_dual <= 1e-10);
  }
}

TEST_CASE("spray coefficients: closed examples") {
  BuiltinModel free = make_model("classical-free");
  ExternalForce none = zero_force(2, 2);
  const double c = 0.8;
  PhaseConnection scaled{constant_field(2, 2, Shape{2, 2, 1}, {c, 0.0, 0.0, c})};
  for (const auto& q : phase_probes(2, 2, 20, kDefaultSeed)) {
    CHECK(max_abs(spray_coefficients(free.algebroid, free.gh, zero_connection(2, 2), none).coefficients()(q)) == 0.0);
    // W_b = Gamma_bc p_c = c p_b and 2G_b = -W_b
    auto G = spray_coefficients(free.algebroid, free.gh, scaled, none).coefficients()(q);
    CHECK(std::abs(2.0 * G[0] + c * q.p[0]) <= 1e-14);
    CHECK(std::abs(2.0 * G[1] + c * q.p[1]) <= 1e-14);
  }
}

TEST_CASE("spray correction terms vanish on the fiber coordinate") {
  for (const auto& mod : all_models()) {
    const int m = mod.algebroid.m(), r = mod.algebroid.r();
    Field C = semispray_connection_corrections(mod.algebroid, mod.gh);
    double worst = 0.0, size = 0.0;
    for (const auto& q : phase_probes(m, r, 50, kDefaultSeed)) {
      auto c = C(q);
      auto G = mod.gh.g_h()(q);
      for (int b = 0; b < r; ++b) {
        double s = 0.0;
        for (int k = 0; k < r; ++k)
          for (int e = 0; e < r; ++e) s += c[b * r + k] * G[k * r + e] * q.p[e];
        worst = std::max(worst, std::abs(s));
      }
      size = std::max(size, max_abs(c));
    }
    INFO(mod.name);
    CHECK(worst <= 1e-12);
    // nonzero corrections where g couples the components
    if (mod.name == "classical-metric") CHECK(size > 1e-3);
  }
}

TEST_CASE("sprays of p-linear connections have zero derivation") {
  for (const auto& mod : all_models()) {
    const int m = mod.algebroid.m(), r = mod.algebroid.r();
    PhaseConnection conn = p_linear_connection(m, r, 51);
    ExternalForce F{make_force(mod, "linear")};
    Semispray s = spray_coefficients(mod.algebroid, mod.gh, conn, F);
    double worst = 0.0;
    for (const auto& q : phase_probes(m, r, 30, kDefaultSeed))
      worst = std::max(worst, max_abs(semispray_derivation(mod.algebroid, s, q)));
    INFO(mod.name);
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("semispray derivation of non-homogeneous coefficients") {
  BuiltinModel mod = make_model("deformed-translate");
  ExternalForce none = zero_force(2, 2);
  Semispray constant = Semispray::from_coefficients(mod.gh, none, constant_field(2, 2, Shape{2, 1, 1}, {0.3, -0.5}));
  Field linear_G = make_phase_field(2, 2, Shape{2, 1, 1}, [](auto, auto p, auto out) {
    out[0] = p[0];
    out[1] = p[1];
  });
  Semispray linear = Semispray::from_coefficients(mod.gh, none, linear_G);
  Semispray random = Semispray::from_combined(mod.gh, none, random_block(2, 2, 61));
  for (const auto& q : phase_probes(2, 2, 20, kDefaultSeed)) {
    auto d = semispray_derivation(mod.algebroid, constant, q);
    CHECK(max_abs(d.Z) <= 1e-14);
    CHECK(std::abs(d.Y[0] - 4.0 * 0.3) <= 1e-13);
    CHECK(std::abs(d.Y[1] + 4.0 * 0.5) <= 1e-13);
    auto e = semispray_derivation(mod.algebroid, linear, q);
    CHECK(std::abs(e.Y[0] - 2.0 * q.p[0]) <= 1e-13);
    CHECK(std::abs(e.Y[1] - 2.0 * q.p[1]) <= 1e-13);
    // Y-block p . dW - 2W in general
    auto f = semispray_derivation(mod.algebroid, random, q);
    auto W = random.combined()(q);
    for (int b = 0; b < 2; ++b) {
      double euler = 0.0;
      for (int a = 0; a < 2; ++a) euler += q.p[a] * partial_field(random.combined(), 2 + a)(q)[b];
      CHECK(std::abs(f.Y[b] - (euler - 2.0 * W[b])) <= 1e-12);
    }
  }
}

TEST_CASE("spray coefficients obey the spray change law") {
  for (const auto& mod : all_models()) {
    const int m = mod.algebroid.m(), r = mod.algebroid.r();
    FiberChange change = oracle::random_fiber_change(m, r, 71);
    PhaseConnection conn{oracle::random_phase_polynomial(m, r, Shape{r, r, 1}, 72, 0.5)};
    ExternalForce none = zero_force(m, r);
    Semispray s = spray_coefficients(mod.algebroid, mod.gh, conn, none);
    AlgebroidModel model2 = transform_model(mod.algebroid, change);
    MorphismGH gh2 = transform_morphism(mod.gh, change);
    Semispray s2 = spray_coefficients(model2, gh2, transform_connection(mod.algebroid, conn, change), zero_force(m, r));
    // 2G' = 2G M_inv - v^a rho^i_a dp'/dx^i, i.e. -2G' is the old block read in new frames
    Field expect = oracle::semispray_block_in_new_frame(mod.algebroid, mod.gh, s.combined(), change);
    double worst = 0.0;
    for (const auto& q : phase_probes(m, r, 30, kDefaultSeed)) {
      auto G2 = s2.coefficients()(q);
      auto W = expect(q);
      for (int b = 0; b < r; ++b) worst = std::max(worst, std::abs(-2.0 * G2[b] - W[b]));
    }
    INFO(mod.name);
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("Berwald connection: closed examples") {
  const int m = 2, r = 2;
  PhaseConnection base_only{random_polynomial_field(m, Shape{r, r, 1}, 81)};
  base_only.Gamma = make_phase_field(m, r, Shape{r, r, 1}, [f = base_only.Gamma](auto x, auto, auto out) {
    using T = typename decltype(out)::value_type;
    f.eval<T>(x, CSpan<T>(), out);
  });
  const std::vector<double> cvec = {0.4, -1.1};
  PhaseConnection bilinear{make_phase_field(m, r, Shape{r, r, 1}, [cvec](auto, auto p, auto out) {
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) out[b * 2 + c] = p[b] * cvec[c];
  })};
  for (const auto& q : phase_probes(m, r, 20, kDefaultSeed)) {
    auto B = berwald_connection(base_only);
    CHECK(max_abs(B.H_fiber(q)) == 0.0);
    CHECK(max_abs(B.V_fiber(q)) == 0.0);
    auto H = berwald_connection(bilinear).H_fiber(q);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        for (int g = 0; g < r; ++g) CHECK(H[(a * r + b) * r + g] == doctest::Approx((a == b ? 1.0 : 0.0) * cvec[g]));
  }
}

TEST_CASE("Berwald coefficients obey the change relations") {
  for (const auto& mod : all_models()) {
    const int m = mod.algebroid.m(), r = mod.algebroid.r();
    PhaseConnection conn{oracle::random_phase_polynomial(m, r, Shape{r, r, 1}, 91, 0.5)};
    auto B = berwald_connection(conn);
    std::vector<double> constant_M(static_cast<std::size_t>(r * r)), constant_L = constant_M;
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) {
        constant_M[a * r + b] = (a == b ? 1.3 : 0.0) + 0.1 * (a + 2 * b);
        constant_L[a * r + b] = (a == b ? 0.9 : 0.0) - 0.05 * (2 * a + b);
      }
    const FiberChange constant(constant_field(m, 0, Shape{r, r, 1}, constant_M, Domain::base),
                               constant_field(m, 0, Shape{r, r, 1}, constant_L, Domain::base));
    const FiberChange varying = oracle::random_fiber_change(m, r, 92);
    // the base copy is read with Lambda o h, so its relation needs Lambda o h = M
    const FiberChange constant_diagonal(constant.M(), constant.M());
    const FiberChange varying_diagonal(varying.M(), varying.M());
    const bool h_is_identity = mod.name != "deformed-translate";
    for (auto [change, check_base] : {std::pair{&constant, false}, std::pair{&varying, false},
                                      std::pair{&constant_diagonal, true}, std::pair{&varying_diagonal, h_is_identity}}) {
      auto B2 = berwald_connection(transform_connection(mod.algebroid, conn, *change));
      double fiber = 0.0, base = 0.0;
      for (const auto& q : phase_probes(m, r, 20, kDefaultSeed)) {
        auto [f, b] = oracle::berwald_change_rhs(mod.algebroid, B, *change, q);
        fiber = std::max(fiber, max_abs_diff(B2.H_fiber(q), f));
        base = std::max(base, max_abs_diff(B2.H_base(q), b));
      }
      INFO(mod.name);
      CHECK(fiber <= 1e-9);
      if (check_base) CHECK(base <= 1e-9);
    }
  }
}

namespace {

// A distinguished linear connection with every block random.
DistinguishedLinearConnection random_dlc(int m, int r, std::uint64_t seed) {
  auto block = [&](std::uint64_t s) { return oracle::random_phase_polynomial(m, r, Shape{r, r, r}, s, 0.5); };
  return {block(seed), block(seed + 1), block(seed + 2), block(seed + 3)};
}

Field kronecker(int m, int r) {
  std::vector<double> id(static_cast<std::size_t>(r * r), 0.0);
  for (int a = 0; a < r; ++a) id[a * r + a] = 1.0;
  return constant_field(m, r, Shape{r * r, 1, 1}, id);
}

// Outer product of two phase fields, flattened row-major.
Field outer(const Field& u, const Field& w) {
  const int nu = u.size(), nw = w.size();
  return make_phase_field(u.base_dim(), u.fiber_dim(), Shape{nu * nw, 1, 1}, [u, w, nw](auto x, auto p, auto out) {
    using T = typename decltype(out)::value_type;
    Buf<T> a = u.eval<T>(x, p), b = w.eval<T>(x, p);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (int j = 0; j < nw; ++j) out[i * nw + j] = a[i] * b[j];
  });
}

}  // namespace

TEST_CASE("covariant derivative: scalars, flat connection and Kronecker tensors") {
  BuiltinModel mod = make_model("deformed-translate");
  const int m = 2, r = 2;
  PhaseConnection conn{oracle::random_phase_polynomial(m, r, Shape{r, r, 1}, 101, 0.5)};
  GeneralizedVectorField X = make_vector_field(random_block(m, r, 102), random_block(m, r, 103));
  Field scalar = oracle::random_phase_polynomial(m, r, Shape{}, 104);
  Field vec = random_block(m, r, 105);
  auto dlc = random_dlc(m, r, 106);
  for (const auto& q : phase_probes(m, r, 20, kDefaultSeed)) {
    auto xv = realize(mod.algebroid, evaluate(X, q));
    std::vector<double> vx(xv.begin(), xv.begin() + m), vp(xv.begin() + m, xv.end());
    auto along = directional<double>(scalar, q.x, q.p, vx, vp);
    auto d = covariant_derivative(mod.algebroid, conn, dlc, make_dtensor(r, {}, scalar), X, q);
    CHECK(std::abs(d[0] - along[0]) <= 1e-12);

    auto flat = berwald_connection(zero_connection(m, r));
    for (Valence v : {Valence{1, 0, 0, 0}, Valence{0, 1, 0, 0}, Valence{0, 0, 1, 0}, Valence{0, 0, 0, 1}}) {
      auto dv = covariant_derivative(mod.algebroid, zero_connection(m, r), flat, make_dtensor(r, v, vec), X, q);
      CHECK(max_abs_diff(dv, directional<double>(vec, q.x, q.p, vx, vp)) <= 1e-12);
    }
    for (Valence v : {Valence{1, 1, 0, 0}, Valence{0, 0, 1, 1}}) {
      auto dk = covariant_derivative(mod.algebroid, conn, dlc, make_dtensor(r, v, kronecker(m, r)), X, q);
      CHECK(max_abs(dk) <= 1e-13);
    }
  }
  CHECK_THROWS_AS(make_dtensor(r, Valence{3, 0, 0, 0}, oracle::random_phase_polynomial(m, r, Shape{8, 1, 1}, 1)),
                  ShapeError);
  CHECK_THROWS_AS(make_dtensor(r, Valence{1, 0, 0, 0}, scalar), ShapeError);
}

TEST_CASE("covariant derivative satisfies Leibniz and commutes with contractions") {
  for (const auto& mod : all_models()) {
    const int m = mod.algebroid.m(), r = mod.algebroid.r();
    PhaseConnection conn{oracle::random_phase_polynomial(m, r, Shape{r, r, 1}, 111, 0.5)};
    auto dlc = random_dlc(m, r, 112);
    GeneralizedVectorField X = make_vector_field(random_block(m, r, 113), random_block(m, r, 114));
    Field u = random_block(m, r, 115), w = random_block(m, r, 116);
    double leibniz = 0.0, contraction = 0.0;
    for (const auto& q : phase_probes(m, r, 10, kDefaultSeed)) {
      auto uv = u(q), wv = w(q);
      for (bool horizontal : {true, false}) {
        // storage puts hu before hd and vd before vu, so `first` fills the leading index
        const Valence up = horizontal ? Valence{1, 0, 0, 0} : Valence{0, 0, 0, 1};
        const Valence down = horizontal ? Valence{0, 1, 0, 0} : Valence{0, 0, 1, 0};
        auto du = covariant_derivative(mod.algebroid, conn, dlc, make_dtensor(r, up, u), X, q);
        auto dw = covariant_derivative(mod.algebroid, conn, dlc, make_dtensor(r, down, w), X, q);
        const auto& d1 = horizontal ? du : dw;
        const auto& d2 = horizontal ? dw : du;
        const auto& v1 = horizontal ? uv : wv;
        const auto& v2 = horizontal ? wv : uv;
        Valence both{up.horizontal_up, down.horizontal_down, down.vertical_down, up.vertical_up};
        Field product = horizontal ? outer(u, w) : outer(w, u);
        auto dp = covariant_derivative(mod.algebroid, conn, dlc, make_dtensor(r, both, product), X, q);
        double trace = 0.0, trace_expect = 0.0;
        for (int a = 0; a < r; ++a) {
          for (int b = 0; b < r; ++b)
            leibniz = std::max(leibniz, std::abs(dp[a * r + b] - (d1[a] * v2[b] + v1[a] * d2[b])));
          trace += dp[a * r + a];
          trace_expect += du[a] * wv[a] + uv[a] * dw[a];
        }
        // the trace is a scalar, so its derivative is the plain derivative
        Field contracted = make_phase_field(m, r, Shape{}, [u, w, r](auto x, auto p, auto out) {
          using T = typename decltype(out)::value_type;
          Buf<T> a = u.eval<T>(x, p), b = w.eval<T>(x, p);
          T s(0.0);
          for (int k = 0; k < r; ++k) s += a[k] * b[k];
          out[0] = s;
        });
        auto ds = covariant_derivative(mod.algebroid, conn, dlc, make_dtensor(r, {}, contracted), X, q);
        contraction = std::max({contraction, std::abs(trace - ds[0]), std::abs(trace_expect - ds[0])});
      }
    }
    INFO(mod.name);
    CHECK(leibniz <= 1e-12);
    CHECK(contraction <= 1e-12);
  }
}

TEST_CASE("ring curvature reduces to the curvature without forces") {
  for (const auto& mod : all_models()) {
    const int m = mod.algebroid.m(), r = mod.algebroid.r();
    PhaseConnection conn{oracle::random_phase_polynomial(m, r, Shape{r, r, 1}, 121, 0.5)};
    double none = 0.0, constant = 0.0;
    ExternalForce c{make_force(mod, "constant")};
    for (const auto& q : phase_probes(m, r, 20, kDefaultSeed)) {
      auto R = connection_curvature(mod.algebroid, conn, q);
      none = std::max(none, max_abs_diff(ring_curvature(mod.algebroid, mod.gh, conn, zero_force(m, r), q), R));
      constant = std::max(constant, max_abs_diff(ring_curvature(mod.algebroid, mod.gh, conn, c, q), R));
    }
    INFO(mod.name);
    CHECK(none == 0.0);
    CHECK(constant == 0.0);
  }
}

TEST_CASE("ring curvature matches the bracket of the deformed adapted basis") {
  for (const auto& mod : all_models()) {
    const int m = mod.algebroid.m(), r = mod.algebroid.r();
    PhaseConnection conn{oracle::random_phase_polynomial(m, r, Shape{r, r, 1}, 131, 0.5)};
    for (const std::string& name : {"modulated", "random"}) {
      ExternalForce F{name == "random" ? oracle::random_phase_polynomial(m, r, Shape{r, 1, 1}, 132, 0.5)
                                       : make_force(mod, name)};
      PhaseConnection ring{linear_combination(1.0, conn.Gamma, 1.0, force_deformation(mod.gh, F))};
      Field corrected = ring_curvature_field(mod.algebroid, mod.gh, conn, F);
      Field literal = ring_curvature_field(mod.algebroid, mod.gh, conn, F, RingCurvatureForm::literal);
      double worst = 0.0, literal_gap = 0.0;
      for (const auto& q : phase_probes(m, r, 20, kDefaultSeed)) {
        auto expect = oracle::bracket_curvature(mod.algebroid, ring, q);
        worst = std::max(worst, max_abs_diff(corrected(q), expect));
        literal_gap = std::max(literal_gap, max_abs_diff(literal(q), expect));
      }
      INFO(mod.name << " force " << name);
      CHECK(worst <= 1e-7);
      if (name == "modulated") CHECK(literal_gap > 1e-3);
    }
  }
}

TEST_CASE("integrate_semispray: free motion is exact") {
  BuiltinModel free = make_model("classical-free");
  Semispray s = Semispray::from_coefficients(free.gh, zero_force(2, 2), zero_force(2, 2).F);
  Trajectory tr = integrate_semispray(s, free.algebroid, {0.5, -1.0}, {1.0, 2.0}, 1.0, 1e-3);
  REQUIRE(tr.size() == 1001);
  CHECK(tr.t.back() == 1.0);
  CHECK(std::abs(tr.x.back()[0] - 1.5) <= 1e-12);
  CHECK(std::abs(tr.x.back()[1] - 1.0) <= 1e-12);
  CHECK(max_abs_diff(tr.p.back(), {1.0, 2.0}) <= 1e-12);
  Trajectory odd = integrate_semispray(s, free.algebroid, {0.0, 0.0}, {1.0, 1.0}, 0.25, 0.1);
  CHECK(odd.size() == 4);
  CHECK(odd.t.back() == 0.25);
  CHECK(std::abs(odd.x.back()[0] - 0.25) <= 1e-15);
  CHECK_THROWS_AS(integrate_semispray(s, free.algebroid, {0, 0}, {1, 1}, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(integrate_semispray(s, free.algebroid, {0, 0, 0}, {1, 1}, 1.0, 0.1), ShapeError);
}

TEST_CASE("integrate_semispray reports blowup with the last valid time") {
  BuiltinModel free = make_model("classical-free");
  // dp/dt = p^4 leaves every bounded set in finite time
  Field W = make_phase_field(2, 2, Shape{2, 1, 1}, [](auto, auto p, auto out) {
    out[0] = p[0] * p[0] * p[0] * p[0];
    out[1] = 0.0 * p[1];
  });
  Semispray s = Semispray::from_combined(free.gh, zero_force(2, 2), W);
  Trajectory partial;
  try {
    integrate_flow(semispray_velocity(free.algebroid, s), {0, 0}, {2.0, 0.0}, 5.0, 1e-2, partial);
    FAIL("expected a blowup");
  } catch (const IntegrationBlowupError& e) {
    CHECK(e.last_valid_time() < 5.0);
    CHECK(e.last_valid_time() == partial.t.back());
    CHECK(partial.size() > 1);
  }
}

TEST_CASE("a non-finite recorded value ends the integration as a blowup") {
  BuiltinModel free = make_model("classical-free");
  Semispray s = Semispray::from_combined(free.gh, zero_force(2, 2), constant_field(2, 2, Shape{2, 1, 1}, {0.0, 0.0}));
  // x1 = t; the recorder fails once x1 passes 0.5
  auto energy = [](const std::vector<double>& x, const std::vector<double>&) {
    if (x[0] > 0.5 + 1e-12) throw NumericalDomainError("energy overflow");
    return 0.0;
  };
  Trajectory partial;
  try {
    integrate_flow(semispray_velocity(free.algebroid, s), {0, 0}, {1.0, 0.0}, 1.0, 0.1, partial, energy);
    FAIL("expected a blowup");
  } catch (const IntegrationBlowupError& e) {
    CHECK(e.last_valid_time() == doctest::Approx(0.5));
    CHECK(partial.t.back() == e.last_valid_time());
    CHECK(partial.energy.size() == partial.size());
  }
}

TEST_CASE("RK4 converges at fourth order") {
  BuiltinModel mod = make_model("deformed-translate");
  PhaseConnection conn = p_linear_connection(2, 2, 141);
  Semispray s = spray_coefficients(mod.algebroid, mod.gh, conn, zero_force(2, 2));
  const std::vector<double> x0 = {0.2, -0.3}, p0 = {0.8, 0.5};
  const double t_end = 1.0, dt = 0.01;
  auto run = [&](double h) { return integrate_semispray(s, mod.algebroid, x0, p0, t_end, h); };
  const Trajectory ref = run(dt / 4), half = run(dt / 2), full = run(dt);
  // max error over the samples shared with the coarse run
  auto error = [&](const Trajectory& tr, std::size_t stride) {
    double e = 0.0;
    for (std::size_t k = 0; k < full.size(); ++k) {
      const std::size_t i = k * stride, j = k * 4;
      e = std::max({e, max_abs_diff(tr.x[i], ref.x[j]), max_abs_diff(tr.p[i], ref.p[j])});
    }
    return e;
  };
  const double e1 = error(full, 1), e2 = error(half, 2);
  const double order = std::log2(e1 / e2);
  INFO("errors " << e1 << " " << e2);
  CHECK(std::abs(order - 4.0) <= 0.2);
}

TEST_CASE("spray trajectories satisfy the four-term momentum equation") {
  for (const auto& mod : all_models()) {
    const int m = mod.algebroid.m(), r = mod.algebroid.r();
    PhaseConnection conn{oracle::random_phase_polynomial(m, r, Shape{r, r, 1}, 151, 0.3)};
    Semispray s = spray_coefficients(mod.algebroid, mod.gh, conn, zero_force(m, r));
    std::vector<double> x0(m, 0.1), p0(r, 0.4);
    p0[0] = -0.3;
    const double dt = 1e-3;
    Trajectory tr = integrate_semispray(s, mod.algebroid, x0, p0, 0.5, dt);
    Field C = semispray_connection_corrections(mod.algebroid, mod.gh);
    double worst = 0.0;
    for (std::size_t k = 2; k + 2 < tr.size(); k += 25) {
      PhasePoint q{tr.x[k], tr.p[k]};
      auto dp = oracle::five_point_derivative(tr.p, k, dt);
      auto Gam = conn.at(q), Cq = C(q), G = mod.gh.g_h()(q);
      for (int b = 0; b < r; ++b) {
        double rhs = 0.0;
        for (int c = 0; c < r; ++c) {
          double v = 0.0;
          for (int e = 0; e < r; ++e) v += G[c * r + e] * q.p[e];
          rhs += (Gam[b * r + c] - Cq[b * r + c]) * v;
        }
        worst = std::max(worst, std::abs(dp[b] - rhs));
      }
    }
    INFO(mod.name);
    CHECK(worst <= 1e-7);
  }
}

TEST_CASE("parallel lifts") {
  BuiltinModel mod = make_model("classical-metric");
  BaseCurve curve{[](double t) { return std::vector<double>{std::cos(t), 0.5 * std::sin(2.0 * t)}; },
                  [](double t) { return std::vector<double>{-std::sin(t), std::cos(2.0 * t)}; }};
  Trajectory flat = parallel_lift(mod.gh, zero_connection(2, 2), curve, {0.3, -0.7}, 1.0, 1e-2);
  for (const auto& u : flat.p) CHECK(max_abs_diff(u, {0.3, -0.7}) == 0.0);
  CHECK(max_abs_diff(flat.x.back(), curve.position(1.0)) == 0.0);

  PhaseConnection conn{oracle::random_phase_polynomial(2, 2, Shape{2, 2, 1}, 161, 0.4)};
  const double dt = 1e-3;
  Trajectory lift = parallel_lift(mod.gh, conn, curve, {0.3, -0.7}, 1.0, dt);
  double worst = 0.0;
  for (std::size_t k = 2; k + 2 < lift.size(); k += 20) {
    PhasePoint q{lift.x[k], lift.p[k]};
    auto du = oracle::five_point_derivative(lift.p, k, dt);
    auto Gam = conn.at(q), G = mod.gh.g_h()(q);
    for (int b = 0; b < 2; ++b) {
      double rhs = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int e = 0; e < 2; ++e) rhs += Gam[b * 2 + a] * G[a * 2 + e] * q.p[e];
      worst = std::max(worst, std::abs(du[b] - rhs));
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("(g, h)-lifts") {
  std::vector<double> times;
  for (int k = 0; k <= 20; ++k) times.push_back(0.05 * k);

  BuiltinModel free = make_model("classical-free");
  BaseCurve line{[](double t) { return std::vector<double>{0.1 + 0.4 * t, -0.2 + 1.5 * t}; },
                 [](double) { return std::vector<double>{0.4, 1.5}; }};
  std::vector<std::vector<double>> velocities(times.size(), {0.4, 1.5});
  CHECK(gh_lift_residual(free.algebroid, free.gh, line, times, velocities) <= 1e-8);

  BuiltinModel so3 = make_model("poisson-so3");
  BaseCurve still{[](double) { return std::vector<double>{0.3}; }, [](double) { return std::vector<double>{0.0}; }};
  std::vector<std::vector<double>> anything;
  for (double t : times) anything.push_back({std::sin(t), t * t, -1.0});
  CHECK(gh_lift_residual(so3.algebroid, so3.gh, still, times, anything) == 0.0);

  BuiltinModel deformed = make_model("deformed-translate");
  BaseCurve wave{[](double t) { return std::vector<double>{std::sin(t), 0.5 * t - 0.2}; },
                 [](double t) { return std::vector<double>{std::cos(t), 0.5}; }};
  GhLift lift = gh_lift(deformed.algebroid, deformed.gh, wave, times);
  CHECK(lift.residual <= 1e-6);
  CHECK(lift.lift.size() == times.size());
  // a wrong momentum sample is detected
  auto wrong = lift.lift.p;
  wrong[3][0] += 0.1;
  CHECK(gh_lift_residual(deformed.algebroid, deformed.gh, wave, times, wrong) > 1e-2);
}
