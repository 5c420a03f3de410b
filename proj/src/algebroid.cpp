#include "algh/algebroid.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "algh/smooth/probes.hpp"

namespace algh {

AlgebroidModel::AlgebroidModel(int m, int r, Field rho, Field L, DiffeoMap h, DiffeoMap eta)
    : m_(m), r_(r), rho_(std::move(rho)), L_(std::move(L)), h_(std::move(h)), eta_(std::move(eta)) {
  if (m < 1 || r < 1) throw ShapeError("algebroid dimensions must be positive");
  if (!(rho_.shape() == Shape{m, r, 1}) || rho_.base_dim() != m) throw ShapeError("anchor must be an m x r base field");
  if (!(L_.shape() == Shape{r, r, r}) || L_.base_dim() != m) throw ShapeError("structure functions must be r x r x r");
  if (h_.dim() != m || eta_.dim() != m) throw ShapeError("base maps must act on R^m");
  rho_h_ = compose_base(rho_, h_.forward);
  L_h_ = compose_base(L_, h_.forward);
}

Section basis_section(const AlgebroidModel& model, int alpha) {
  if (alpha < 0 || alpha >= model.r()) throw ShapeError("basis section index out of range");
  std::vector<double> e(static_cast<std::size_t>(model.r()), 0.0);
  e[alpha] = 1.0;
  return constant_field(model.m(), 0, Shape{model.r(), 1, 1}, e, Domain::base);
}

namespace {

class SectionBracket final : public FieldModel<SectionBracket> {
 public:
  SectionBracket(const AlgebroidModel& model, Section u, Section v)
      : r_(model.r()),
        m_(model.m()),
        rho_h_(model.rho_h()),
        L_(model.L()),
        h_inv_(model.h().inverse),
        u_(u),
        v_(v),
        u_h_(compose_base(u, model.h().forward)),
        v_h_(compose_base(v, model.h().forward)) {}

  template <class T>
  void apply(CSpan<T> y, CSpan<T> p, std::span<T> out) const {
    Buf<T> x = h_inv_.eval<T>(y, p);
    CSpan<T> xs(x);
    Buf<T> R = rho_h_.eval<T>(xs, p);
    Buf<T> uh = u_h_.eval<T>(xs, p);
    Buf<T> vh = v_h_.eval<T>(xs, p);
    Buf<T> Xu(m_, T(0.0)), Xv(m_, T(0.0));
    for (int i = 0; i < m_; ++i)
      for (int a = 0; a < r_; ++a) {
        Xu[i] += R[i * r_ + a] * uh[a];
        Xv[i] += R[i * r_ + a] * vh[a];
      }
    Buf<T> dv = directional<T>(v_h_, xs, p, CSpan<T>(Xu), CSpan<T>());
    Buf<T> du = directional<T>(u_h_, xs, p, CSpan<T>(Xv), CSpan<T>());
    Buf<T> uy = u_.eval<T>(y, p);
    Buf<T> vy = v_.eval<T>(y, p);
    Buf<T> L = L_.eval<T>(y, p);
    for (int g = 0; g < r_; ++g) {
      T s = dv[g] - du[g];
      for (int a = 0; a < r_; ++a)
        for (int b = 0; b < r_; ++b) s += uy[a] * vy[b] * L[(g * r_ + a) * r_ + b];
      out[g] = s;
    }
  }

 private:
  int r_, m_;
  Field rho_h_, L_, h_inv_, u_, v_, u_h_, v_h_;
};

class ScalarTimes final : public FieldModel<ScalarTimes> {
 public:
  ScalarTimes(Field s, Field v) : s_(std::move(s)), v_(std::move(v)) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    Buf<T> s = s_.eval<T>(x, p);
    v_.eval<T>(x, p, out);
    for (T& o : out) o = s[0] * o;
  }

 private:
  Field s_, v_;
};

void check_section(const AlgebroidModel& model, const Section& s) {
  if (s.size() != model.r() || s.base_dim() != model.m() || s.domain() != Domain::base)
    throw ShapeError("section must be a base field with r components");
}

double max_abs(const std::vector<double>& v) {
  double w = 0.0;
  for (double d : v) w = std::max(w, std::abs(d));
  return w;
}

}  // namespace

Section bracket(const AlgebroidModel& model, const Section& u, const Section& v) {
  check_section(model, u);
  check_section(model, v);
  return Field(std::make_shared<SectionBracket>(model, u, v), Shape{model.r(), 1, 1}, Domain::base, model.m(), 0);
}

double composed_anchor(const AlgebroidModel& model, const Section& u, const Field& f, const std::vector<double>& at) {
  check_section(model, u);
  if (f.size() != 1 || f.base_dim() != model.m()) throw ShapeError("composed_anchor expects a scalar base field");
  std::vector<double> x = model.eta()(at);
  Field u_h = compose_base(u, model.h().forward);
  Field f_h = compose_base(f, model.h().forward);
  std::vector<double> R = model.rho_h().at_base(x);
  std::vector<double> uh = u_h.at_base(x);
  const int m = model.m(), r = model.r();
  std::vector<double> X(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i)
    for (int a = 0; a < r; ++a) X[i] += R[i * r + a] * uh[a];
  Buf<double> d = directional<double>(f_h, CSpan<double>(x), CSpan<double>(), CSpan<double>(X), CSpan<double>());
  if (!std::isfinite(d[0])) throw NumericalDomainError("composed_anchor: non-finite value");
  return d[0];
}

double anchor_compatibility_residual(const AlgebroidModel& model, const std::vector<std::vector<double>>& points) {
  const int m = model.m(), r = model.r();
  double worst = 0.0;
  for (const auto& x : points) {
    CSpan<double> xs(x);
    Buf<double> R = model.rho_h().eval<double>(xs, CSpan<double>());
    Buf<double> L = model.L_h().eval<double>(xs, CSpan<double>());
    // dR[a] = derivative of rho o h along the column X_a = (rho o h)_a.
    std::vector<Buf<double>> dR;
    for (int a = 0; a < r; ++a) {
      Buf<double> Xa(m);
      for (int i = 0; i < m; ++i) Xa[i] = R[i * r + a];
      dR.push_back(directional<double>(model.rho_h(), xs, CSpan<double>(), CSpan<double>(Xa), CSpan<double>()));
    }
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        for (int k = 0; k < m; ++k) {
          double lhs = 0.0;
          for (int g = 0; g < r; ++g) lhs += L[(g * r + a) * r + b] * R[k * r + g];
          double rhs = dR[a][k * r + b] - dR[b][k * r + a];
          worst = std::max(worst, std::abs(lhs - rhs));
        }
  }
  return worst;
}

Field random_polynomial_field(int m, Shape shape, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  const int terms = 1 + m + m * (m + 1) / 2;
  std::vector<double> coef(static_cast<std::size_t>(shape.size() * terms));
  for (double& c : coef) c = u(rng);
  auto poly = [coef, m, terms](auto x, auto out) {
    using T = typename decltype(out)::value_type;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double* c = coef.data() + k * terms;
      T s(c[0]);
      int idx = 1;
      for (int i = 0; i < m; ++i) s += c[idx++] * x[i];
      for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) s += c[idx++] * x[i] * x[j];
      out[k] = s;
    }
  };
  return make_base_field(m, shape, poly);
}

AxiomReport check_axioms(const AlgebroidModel& model, int probes, std::uint64_t seed) {
  if (probes < 1) throw std::invalid_argument("check_axioms: probes must be >= 1");
  const int m = model.m(), r = model.r();
  AxiomReport rep;
  auto points = base_probes(m, probes, seed);
  Section u = random_polynomial_field(m, Shape{r, 1, 1}, seed + 1);
  Section v = random_polynomial_field(m, Shape{r, 1, 1}, seed + 2);
  Section w = random_polynomial_field(m, Shape{r, 1, 1}, seed + 3);
  Field f = random_polynomial_field(m, Shape{1, 1, 1}, seed + 4);
  Field fv(std::make_shared<ScalarTimes>(f, v), Shape{r, 1, 1}, Domain::base, m, 0);

  Section uv = bracket(model, u, v), vu = bracket(model, v, u);
  Section ufv = bracket(model, u, fv);
  Section jac1 = bracket(model, uv, w);
  Section jac2 = bracket(model, bracket(model, v, w), u);
  Section jac3 = bracket(model, bracket(model, w, u), v);

  for (const auto& kappa : points) {
    Buf<double> L = model.L().at_base(kappa);
    for (int g = 0; g < r; ++g)
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
          rep.antisymmetry = std::max(rep.antisymmetry, std::abs(L[(g * r + a) * r + b] + L[(g * r + b) * r + a]));
    std::vector<double> s1 = uv.at_base(kappa), s2 = vu.at_base(kappa);
    for (int g = 0; g < r; ++g) rep.antisymmetry = std::max(rep.antisymmetry, std::abs(s1[g] + s2[g]));

    std::vector<double> y = model.h()(model.eta()(kappa));
    std::vector<double> lhs = ufv.at_base(y);
    std::vector<double> b = uv.at_base(y);
    double fy = f.at_base(y)[0];
    double anchor = composed_anchor(model, u, f, kappa);
    std::vector<double> vy = v.at_base(y);
    for (int g = 0; g < r; ++g) rep.leibniz = std::max(rep.leibniz, std::abs(lhs[g] - fy * b[g] - anchor * vy[g]));

    std::vector<double> j1 = jac1.at_base(kappa), j2 = jac2.at_base(kappa), j3 = jac3.at_base(kappa);
    std::vector<double> sum(static_cast<std::size_t>(r));
    for (int g = 0; g < r; ++g) sum[g] = j1[g] + j2[g] + j3[g];
    rep.jacobi = std::max(rep.jacobi, max_abs(sum));
  }
  rep.anchor_compatibility = anchor_compatibility_residual(model, points);
  return rep;
}

}  // namespace algh
