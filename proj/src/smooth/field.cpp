#include "algh/smooth/field.hpp"

#include <string>

namespace algh {

namespace {

void require_finite(const std::vector<double>& v) {
  for (double d : v)
    if (!is_finite(d)) throw NumericalDomainError("field evaluation produced a non-finite value");
}

class ConstantField final : public FieldModel<ConstantField> {
 public:
  explicit ConstantField(std::vector<double> v) : v_(std::move(v)) {}
  template <class T>
  void apply(CSpan<T>, CSpan<T>, std::span<T> out) const {
    for (std::size_t i = 0; i < v_.size(); ++i) out[i] = T(v_[i]);
  }

 private:
  std::vector<double> v_;
};

class PartialField final : public FieldModel<PartialField> {
 public:
  PartialField(Field f, int k) : f_(std::move(f)), k_(k) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    partial<T>(f_, x, p, k_, out);
  }

 private:
  Field f_;
  int k_;
};

class ComposeField final : public FieldModel<ComposeField> {
 public:
  ComposeField(Field f, Field h) : f_(std::move(f)), h_(std::move(h)) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    Buf<T> y = h_.eval<T>(x, p);
    f_.eval<T>(CSpan<T>(y), p, out);
  }

 private:
  Field f_;
  Field h_;
};

class CombinationField final : public FieldModel<CombinationField> {
 public:
  CombinationField(double a, Field f, double b, Field g) : a_(a), b_(b), f_(std::move(f)), g_(std::move(g)) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    Buf<T> u = f_.eval<T>(x, p);
    Buf<T> v = g_.eval<T>(x, p);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a_ * u[i] + b_ * v[i];
  }

 private:
  double a_, b_;
  Field f_, g_;
};

class ProductField final : public FieldModel<ProductField> {
 public:
  ProductField(Field lhs, Field rhs, int n, int k, int l)
      : lhs_(std::move(lhs)), rhs_(std::move(rhs)), n_(n), k_(k), l_(l) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    Buf<T> a = lhs_.eval<T>(x, p);
    Buf<T> b = rhs_.eval<T>(x, p);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < l_; ++j) {
        T s(0.0);
        for (int q = 0; q < k_; ++q) s += a[i * k_ + q] * b[q * l_ + j];
        out[i * l_ + j] = s;
      }
  }

 private:
  Field lhs_, rhs_;
  int n_, k_, l_;
};

Domain merge(Domain a, Domain b) { return (a == Domain::base && b == Domain::base) ? Domain::base : Domain::phase; }

}  // namespace

std::vector<double> Field::operator()(const PhasePoint& q) const {
  if (static_cast<int>(q.x.size()) != m_) throw ShapeError("base point has the wrong dimension");
  if (domain_ == Domain::phase && static_cast<int>(q.p.size()) != r_)
    throw ShapeError("momentum vector has the wrong dimension");
  std::vector<double> out = eval<double>(CSpan<double>(q.x), CSpan<double>(q.p));
  require_finite(out);
  return out;
}

std::vector<double> Field::at_base(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != m_) throw ShapeError("base point has the wrong dimension");
  if (domain_ != Domain::base) throw ShapeError("phase field evaluated at a base point");
  std::vector<double> out = eval<double>(CSpan<double>(x), CSpan<double>());
  require_finite(out);
  return out;
}

Field constant_field(int m, int r, Shape shape, std::vector<double> values, Domain domain) {
  if (static_cast<int>(values.size()) != shape.size()) throw ShapeError("constant field size mismatch");
  return Field(std::make_shared<ConstantField>(std::move(values)), shape, domain, m,
               domain == Domain::base ? 0 : r);
}

Field partial_field(const Field& f, int k) {
  if (k < 0 || k >= f.base_dim() + f.fiber_dim()) {
    if (!(f.domain() == Domain::base && k >= f.base_dim()))
      throw ShapeError("partial_field: coordinate index out of range");
  }
  return Field(std::make_shared<PartialField>(f, k), f.shape(), f.domain(), f.base_dim(), f.fiber_dim());
}

Field compose_base(const Field& f, const Field& h) {
  if (h.domain() != Domain::base || h.size() != f.base_dim() || h.base_dim() != f.base_dim())
    throw ShapeError("compose_base: map dimension does not match the field's base");
  return Field(std::make_shared<ComposeField>(f, h), f.shape(), f.domain(), f.base_dim(), f.fiber_dim());
}

Field linear_combination(double a, const Field& f, double b, const Field& g) {
  if (!(f.shape() == g.shape()) || f.base_dim() != g.base_dim())
    throw ShapeError("linear_combination: operand shapes differ");
  Domain d = merge(f.domain(), g.domain());
  int r = std::max(f.fiber_dim(), g.fiber_dim());
  return Field(std::make_shared<CombinationField>(a, f, b, g), f.shape(), d, f.base_dim(), r);
}

Field mat_vec(const Field& matrix, const Field& vec) {
  const Shape& s = matrix.shape();
  if (s.cols != vec.size() || matrix.base_dim() != vec.base_dim()) throw ShapeError("mat_vec: inner dimension mismatch");
  int r = std::max(matrix.fiber_dim(), vec.fiber_dim());
  return Field(std::make_shared<ProductField>(matrix, vec, s.rows, s.cols, 1), Shape{s.rows, 1, 1},
               merge(matrix.domain(), vec.domain()), matrix.base_dim(), r);
}

Field mat_mat(const Field& lhs, const Field& rhs) {
  const Shape& a = lhs.shape();
  const Shape& b = rhs.shape();
  if (a.cols != b.rows || lhs.base_dim() != rhs.base_dim()) throw ShapeError("mat_mat: inner dimension mismatch");
  int r = std::max(lhs.fiber_dim(), rhs.fiber_dim());
  return Field(std::make_shared<ProductField>(lhs, rhs, a.rows, a.cols, b.cols), Shape{a.rows, b.cols, 1},
               merge(lhs.domain(), rhs.domain()), lhs.base_dim(), r);
}

}  // namespace algh
