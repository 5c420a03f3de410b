#pragma once

// Type-erased differentiable fields over base points x in R^m and phase
// points (x, p) in R^m x R^r. A field returns a flat array (row-major for
// matrices and rank-3 arrays) and can be evaluated at every nesting level
// Real<0> .. Real<kMaxLevel>, which is what lets derived fields (connections
// built from derivatives of a Hamiltonian, curvature built from derivatives
// of a connection) be differentiated again.

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "algh/smooth/dual.hpp"
#include "algh/smooth/errors.hpp"

namespace algh {

inline constexpr int kMaxLevel = 5;

template <class T> using CSpan = std::span<const T>;
template <class T> using Buf = std::vector<T>;

struct Shape {
  int rows = 1;
  int cols = 1;
  int depth = 1;
  constexpr int size() const { return rows * cols * depth; }
  friend constexpr bool operator==(const Shape&, const Shape&) = default;
};

enum class Domain { base, phase };

struct PhasePoint {
  std::vector<double> x;
  std::vector<double> p;
};

class FieldImpl {
 public:
  virtual ~FieldImpl() = default;
  virtual void eval(CSpan<Real<0>> x, CSpan<Real<0>> p, std::span<Real<0>> out) const = 0;
  virtual void eval(CSpan<Real<1>> x, CSpan<Real<1>> p, std::span<Real<1>> out) const = 0;
  virtual void eval(CSpan<Real<2>> x, CSpan<Real<2>> p, std::span<Real<2>> out) const = 0;
  virtual void eval(CSpan<Real<3>> x, CSpan<Real<3>> p, std::span<Real<3>> out) const = 0;
  virtual void eval(CSpan<Real<4>> x, CSpan<Real<4>> p, std::span<Real<4>> out) const = 0;
  virtual void eval(CSpan<Real<5>> x, CSpan<Real<5>> p, std::span<Real<5>> out) const = 0;
};

// CRTP adapter: Derived supplies `template <class T> void apply(x, p, out) const`.
template <class Derived>
class FieldModel : public FieldImpl {
 public:
  void eval(CSpan<Real<0>> x, CSpan<Real<0>> p, std::span<Real<0>> out) const final { self().apply(x, p, out); }
  void eval(CSpan<Real<1>> x, CSpan<Real<1>> p, std::span<Real<1>> out) const final { self().apply(x, p, out); }
  void eval(CSpan<Real<2>> x, CSpan<Real<2>> p, std::span<Real<2>> out) const final { self().apply(x, p, out); }
  void eval(CSpan<Real<3>> x, CSpan<Real<3>> p, std::span<Real<3>> out) const final { self().apply(x, p, out); }
  void eval(CSpan<Real<4>> x, CSpan<Real<4>> p, std::span<Real<4>> out) const final { self().apply(x, p, out); }
  void eval(CSpan<Real<5>> x, CSpan<Real<5>> p, std::span<Real<5>> out) const final { self().apply(x, p, out); }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

class Field {
 public:
  Field() = default;
  Field(std::shared_ptr<const FieldImpl> impl, Shape shape, Domain domain, int m, int r)
      : impl_(std::move(impl)), shape_(shape), domain_(domain), m_(m), r_(r) {}

  bool valid() const { return impl_ != nullptr; }
  const Shape& shape() const { return shape_; }
  int size() const { return shape_.size(); }
  Domain domain() const { return domain_; }
  int base_dim() const { return m_; }
  // Number of momenta the field reads; zero for base fields.
  int fiber_dim() const { return r_; }

  template <class T>
  void eval(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    impl_->eval(x, p, out);
  }
  template <class T>
  Buf<T> eval(CSpan<T> x, CSpan<T> p) const {
    Buf<T> out(static_cast<std::size_t>(size()));
    impl_->eval(x, p, std::span<T>(out));
    return out;
  }

  // Checked double-precision evaluation.
  std::vector<double> operator()(const PhasePoint& q) const;
  std::vector<double> at_base(const std::vector<double>& x) const;

 private:
  std::shared_ptr<const FieldImpl> impl_;
  Shape shape_{};
  Domain domain_ = Domain::phase;
  int m_ = 0;
  int r_ = 0;
};

template <class F>
class LambdaField final : public FieldModel<LambdaField<F>> {
 public:
  explicit LambdaField(F f) : f_(std::move(f)) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    f_(x, p, out);
  }

 private:
  F f_;
};

// f(x, p, out) with generic spans.
template <class F>
Field make_phase_field(int m, int r, Shape shape, F f) {
  return Field(std::make_shared<LambdaField<F>>(std::move(f)), shape, Domain::phase, m, r);
}

// f(x, out) with generic spans; momenta are ignored.
template <class F>
Field make_base_field(int m, Shape shape, F f) {
  auto g = [f = std::move(f)](auto x, auto /*p*/, auto out) { f(x, out); };
  return Field(std::make_shared<LambdaField<decltype(g)>>(std::move(g)), shape, Domain::base, m, 0);
}

Field constant_field(int m, int r, Shape shape, std::vector<double> values, Domain domain = Domain::phase);

// --- derivative kernels -----------------------------------------------------

template <class T>
inline constexpr bool can_nest_v = level_v<T> + 1 <= kMaxLevel;

// Seeds coordinate k (x^k for k < m, p_{k-m} otherwise) and returns d/dq_k of
// every component.
template <class T>
void partial(const Field& f, CSpan<T> x, CSpan<T> p, int k, std::span<T> out) {
  if constexpr (!can_nest_v<T>) {
    throw DerivativeDepthError();
  } else {
    using D = Dual<T>;
    const int m = static_cast<int>(x.size());
    Buf<D> xx(x.size()), pp(p.size());
    for (std::size_t i = 0; i < x.size(); ++i) xx[i] = D(x[i], T(static_cast<int>(i) == k ? 1.0 : 0.0));
    for (std::size_t a = 0; a < p.size(); ++a) pp[a] = D(p[a], T(static_cast<int>(a) + m == k ? 1.0 : 0.0));
    Buf<D> r(out.size());
    f.eval(CSpan<D>(xx), CSpan<D>(pp), std::span<D>(r));
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = r[j].d;
  }
}

template <class T>
Buf<T> partial(const Field& f, CSpan<T> x, CSpan<T> p, int k) {
  Buf<T> out(static_cast<std::size_t>(f.size()));
  partial<T>(f, x, p, k, out);
  return out;
}

// Derivative of every component along the phase-space tangent (vx, vp).
template <class T>
void directional(const Field& f, CSpan<T> x, CSpan<T> p, CSpan<T> vx, CSpan<T> vp, std::span<T> out) {
  if constexpr (!can_nest_v<T>) {
    throw DerivativeDepthError();
  } else {
    using D = Dual<T>;
    Buf<D> xx(x.size()), pp(p.size());
    for (std::size_t i = 0; i < x.size(); ++i) xx[i] = D(x[i], vx[i]);
    for (std::size_t a = 0; a < p.size(); ++a) pp[a] = D(p[a], vp.empty() ? T(0.0) : vp[a]);
    Buf<D> r(out.size());
    f.eval(CSpan<D>(xx), CSpan<D>(pp), std::span<D>(r));
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = r[j].d;
  }
}

template <class T>
Buf<T> directional(const Field& f, CSpan<T> x, CSpan<T> p, CSpan<T> vx, CSpan<T> vp) {
  Buf<T> out(static_cast<std::size_t>(f.size()));
  directional<T>(f, x, p, vx, vp, out);
  return out;
}

// Value, both first partials and the mixed second partial of component
// `comp` with respect to coordinates i and j.
template <class T>
struct Second {
  T value{};
  T di{};
  T dj{};
  T dij{};
};

template <class T>
Second<T> second_partial(const Field& f, CSpan<T> x, CSpan<T> p, int i, int j, int comp = 0) {
  if constexpr (level_v<T> + 2 > kMaxLevel) {
    throw DerivativeDepthError();
  } else {
    using D1 = Dual<T>;
    using D2 = Dual<D1>;
    const int m = static_cast<int>(x.size());
    auto seed = [&](T v, int k) {
      return D2(D1(v, T(k == i ? 1.0 : 0.0)), D1(T(k == j ? 1.0 : 0.0), T(0.0)));
    };
    Buf<D2> xx(x.size()), pp(p.size());
    for (int k = 0; k < m; ++k) xx[k] = seed(x[k], k);
    for (std::size_t a = 0; a < p.size(); ++a) pp[a] = seed(p[a], static_cast<int>(a) + m);
    Buf<D2> r(static_cast<std::size_t>(f.size()));
    f.eval(CSpan<D2>(xx), CSpan<D2>(pp), std::span<D2>(r));
    const D2& z = r[comp];
    return {z.v.v, z.v.d, z.d.v, z.d.d};
  }
}

// Field of d/dq_k of every component (q = (x, p)).
Field partial_field(const Field& f, int k);

// Composition x -> f(h(x), p) where h is a base field of shape m.
Field compose_base(const Field& f, const Field& h);

// Componentwise sum of two equally shaped fields, scaled: a*f + b*g.
Field linear_combination(double a, const Field& f, double b, const Field& g);

// Matrix field (n x k) times vector field (k) -> vector field (n).
Field mat_vec(const Field& matrix, const Field& vec);

// Matrix field (n x k) times matrix field (k x l).
Field mat_mat(const Field& lhs, const Field& rhs);

}  // namespace algh
