#pragma once

// Forward-mode dual numbers. Nesting Dual<Dual<double>> gives mixed second
// partials; the field layer nests up to kMaxLevel deep.

#include <cmath>
#include <type_traits>

namespace algh {

template <class T>
struct Dual {
  T v{};  // value
  T d{};  // derivative along the seeded direction

  constexpr Dual() = default;
  constexpr Dual(double c) : v(c), d(0.0) {}  // NOLINT: constants promote implicitly
  constexpr Dual(const T& value, const T& deriv) : v(value), d(deriv) {}

  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { *this = *this * o; return *this; }
  Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }
};

template <class T> struct level_of : std::integral_constant<int, 0> {};
template <class T> struct level_of<Dual<T>> : std::integral_constant<int, level_of<T>::value + 1> {};
template <class T> inline constexpr int level_v = level_of<T>::value;

template <int K> struct real_at { using type = Dual<typename real_at<K - 1>::type>; };
template <> struct real_at<0> { using type = double; };
template <int K> using Real = typename real_at<K>::type;

inline constexpr double value_of(double x) { return x; }
template <class T> constexpr double value_of(const Dual<T>& x) { return value_of(x.v); }

// Promote a double into any level with zero derivative parts.
template <class T> constexpr T lift(double c) { return T(c); }

template <class T> constexpr Dual<T> operator+(const Dual<T>& a) { return a; }
template <class T> constexpr Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }

template <class T> constexpr Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T> constexpr Dual<T> operator+(const Dual<T>& a, double b) { return {a.v + b, a.d}; }
template <class T> constexpr Dual<T> operator+(double a, const Dual<T>& b) { return {a + b.v, b.d}; }

template <class T> constexpr Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T> constexpr Dual<T> operator-(const Dual<T>& a, double b) { return {a.v - b, a.d}; }
template <class T> constexpr Dual<T> operator-(double a, const Dual<T>& b) { return {a - b.v, -b.d}; }

template <class T> constexpr Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
template <class T> constexpr Dual<T> operator*(const Dual<T>& a, double b) { return {a.v * b, a.d * b}; }
template <class T> constexpr Dual<T> operator*(double a, const Dual<T>& b) { return {a * b.v, a * b.d}; }

template <class T>
constexpr Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  T inv = 1.0 / b.v;
  T q = a.v * inv;
  return {q, (a.d - q * b.d) * inv};
}
template <class T> constexpr Dual<T> operator/(const Dual<T>& a, double b) { return {a.v / b, a.d / b}; }
template <class T>
constexpr Dual<T> operator/(double a, const Dual<T>& b) {
  T inv = 1.0 / b.v;
  return {a * inv, -a * inv * inv * b.d};
}

// Comparisons look at the underlying value only.
template <class A, class B>
  requires(level_v<A> > 0 || level_v<B> > 0)
constexpr bool operator<(const A& a, const B& b) { return value_of(a) < value_of(b); }
template <class A, class B>
  requires(level_v<A> > 0 || level_v<B> > 0)
constexpr bool operator>(const A& a, const B& b) { return value_of(a) > value_of(b); }
template <class A, class B>
  requires(level_v<A> > 0 || level_v<B> > 0)
constexpr bool operator<=(const A& a, const B& b) { return value_of(a) <= value_of(b); }
template <class A, class B>
  requires(level_v<A> > 0 || level_v<B> > 0)
constexpr bool operator>=(const A& a, const B& b) { return value_of(a) >= value_of(b); }

// Same entities as the std overloads, so unqualified calls on doubles stay
// unambiguous under using-directives.
using std::cos;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sqrt;
using std::tanh;

template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  T s = sqrt(a.v);
  return {s, a.d / (2.0 * s)};
}
template <class T>
Dual<T> exp(const Dual<T>& a) {
  T e = exp(a.v);
  return {e, e * a.d};
}
template <class T> Dual<T> log(const Dual<T>& a) { return {log(a.v), a.d / a.v}; }
template <class T> Dual<T> sin(const Dual<T>& a) { return {sin(a.v), cos(a.v) * a.d}; }
template <class T> Dual<T> cos(const Dual<T>& a) { return {cos(a.v), -sin(a.v) * a.d}; }
template <class T>
Dual<T> tanh(const Dual<T>& a) {
  T t = tanh(a.v);
  return {t, (1.0 - t * t) * a.d};
}
template <class T>
Dual<T> pow(const Dual<T>& a, double e) {
  return {pow(a.v, e), e * pow(a.v, e - 1.0) * a.d};
}

template <class T> T square(const T& a) { return a * a; }

inline bool is_finite(double x) { return std::isfinite(x); }
template <class T> bool is_finite(const Dual<T>& a) { return is_finite(a.v) && is_finite(a.d); }

}  // namespace algh
