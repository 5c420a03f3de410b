#pragma once

// Small dense row-major kernels that work at every dual nesting level.

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "algh/smooth/dual.hpp"
#include "algh/smooth/field.hpp"

namespace algh {

// Gauss-Jordan inverse with partial pivoting on the underlying values.
// Returns false when a pivot falls below rel_tol times the largest entry.
template <class T>
bool invert(std::span<const T> a, int n, std::span<T> out, double rel_tol = 1e-13) {
  std::vector<T> w(a.begin(), a.end());
  std::vector<T> inv(static_cast<std::size_t>(n * n), T(0.0));
  for (int i = 0; i < n; ++i) inv[i * n + i] = T(1.0);
  double scale = 0.0;
  for (const T& v : w) scale = std::max(scale, std::abs(value_of(v)));
  if (scale == 0.0) return false;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(value_of(w[r * n + c])) > std::abs(value_of(w[piv * n + c]))) piv = r;
    if (std::abs(value_of(w[piv * n + c])) <= rel_tol * scale) return false;
    if (piv != c) {
      for (int k = 0; k < n; ++k) {
        std::swap(w[c * n + k], w[piv * n + k]);
        std::swap(inv[c * n + k], inv[piv * n + k]);
      }
    }
    T d = 1.0 / w[c * n + c];
    for (int k = 0; k < n; ++k) {
      w[c * n + k] = w[c * n + k] * d;
      inv[c * n + k] = inv[c * n + k] * d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      T f = w[r * n + c];
      if (value_of(f) == 0.0 && level_v<T> == 0) continue;
      for (int k = 0; k < n; ++k) {
        w[r * n + k] = w[r * n + k] - f * w[c * n + k];
        inv[r * n + k] = inv[r * n + k] - f * inv[c * n + k];
      }
    }
  }
  for (int i = 0; i < n * n; ++i) out[i] = inv[i];
  return true;
}

// Pointwise inverse of a square matrix field; throws Error where the
// matrix is numerically singular.
template <class Error>
class InverseField final : public FieldModel<InverseField<Error>> {
 public:
  InverseField(Field square, const char* what) : f_(std::move(square)), what_(what), n_(f_.shape().rows) {}
  template <class T>
  void apply(CSpan<T> x, CSpan<T> p, std::span<T> out) const {
    Buf<T> a = f_.eval<T>(x, p);
    for (const T& v : a)
      if (!std::isfinite(value_of(v))) throw NumericalDomainError("inverse_field: non-finite matrix entry");
    if (!invert<T>(CSpan<T>(a), n_, out)) throw Error(what_);
  }

 private:
  Field f_;
  const char* what_;
  int n_;
};

template <class Error>
Field inverse_field(const Field& square, const char* what) {
  if (square.shape().rows != square.shape().cols || square.shape().depth != 1)
    throw ShapeError("inverse_field: matrix field must be square");
  return Field(std::make_shared<InverseField<Error>>(square, what), square.shape(), square.domain(),
               square.base_dim(), square.fiber_dim());
}

}  // namespace algh
