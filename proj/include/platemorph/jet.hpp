#pragma once

// Forward-mode derivatives in two variables.
//
// Jet2<T> carries a value with its first and second partials; Jet1<T> stops at
// first order. Both nest, so Jet2<Jet2<double>> gives partials of partials.

#include <cmath>
#include <type_traits>

#include "errors.hpp"

namespace platemorph {

template <class T>
struct Jet2 {
  T v{}, x{}, y{}, xx{}, xy{}, yy{};

  Jet2() = default;
  Jet2(double c) : v(c), x(0.0), y(0.0), xx(0.0), xy(0.0), yy(0.0) {}
  Jet2(const T& v_, const T& x_, const T& y_, const T& xx_, const T& xy_, const T& yy_)
      : v(v_), x(x_), y(y_), xx(xx_), xy(xy_), yy(yy_) {}

  static Jet2 constant(const T& c) { return Jet2(c, T(0.0), T(0.0), T(0.0), T(0.0), T(0.0)); }
  static Jet2 var_x(const T& c) { return Jet2(c, T(1.0), T(0.0), T(0.0), T(0.0), T(0.0)); }
  static Jet2 var_y(const T& c) { return Jet2(c, T(0.0), T(1.0), T(0.0), T(0.0), T(0.0)); }
};

template <class T>
struct Jet1 {
  T v{}, x{}, y{};

  Jet1() = default;
  Jet1(double c) : v(c), x(0.0), y(0.0) {}
  Jet1(const T& v_, const T& x_, const T& y_) : v(v_), x(x_), y(y_) {}
};

template <class T> struct is_jet : std::false_type {};
template <class T> struct is_jet<Jet2<T>> : std::true_type {};
template <class T> struct is_jet<Jet1<T>> : std::true_type {};
template <class T> inline constexpr bool is_jet_v = is_jet<T>::value;

template <class T>
  requires std::is_floating_point_v<T>
inline T value_of(T a) { return a; }
template <class T> inline auto value_of(const Jet2<T>& a) { return value_of(a.v); }
template <class T> inline auto value_of(const Jet1<T>& a) { return value_of(a.v); }

template <class T>
  requires std::is_floating_point_v<T>
inline T sech(T a) { return T(1) / std::cosh(a); }

// Jet from a composite f(u) given f, f', f'' at u.v.
template <class T>
inline Jet2<T> chain(const Jet2<T>& u, const T& f0, const T& f1, const T& f2) {
  return Jet2<T>(f0, f1 * u.x, f1 * u.y, f2 * (u.x * u.x) + f1 * u.xx, f2 * (u.x * u.y) + f1 * u.xy,
                 f2 * (u.y * u.y) + f1 * u.yy);
}

template <class T>
inline Jet1<T> chain(const Jet1<T>& u, const T& f0, const T& f1) {
  return Jet1<T>(f0, f1 * u.x, f1 * u.y);
}

// ---- Jet2 arithmetic

template <class T> inline Jet2<T> operator+(const Jet2<T>& a) { return a; }
template <class T> inline Jet2<T> operator-(const Jet2<T>& a) {
  return Jet2<T>(-a.v, -a.x, -a.y, -a.xx, -a.xy, -a.yy);
}
template <class T> inline Jet2<T> operator+(const Jet2<T>& a, const Jet2<T>& b) {
  return Jet2<T>(a.v + b.v, a.x + b.x, a.y + b.y, a.xx + b.xx, a.xy + b.xy, a.yy + b.yy);
}
template <class T> inline Jet2<T> operator-(const Jet2<T>& a, const Jet2<T>& b) {
  return Jet2<T>(a.v - b.v, a.x - b.x, a.y - b.y, a.xx - b.xx, a.xy - b.xy, a.yy - b.yy);
}
template <class T> inline Jet2<T> operator*(const Jet2<T>& a, const Jet2<T>& b) {
  return Jet2<T>(a.v * b.v, a.x * b.v + a.v * b.x, a.y * b.v + a.v * b.y,
                 a.xx * b.v + (a.x * b.x) * 2.0 + a.v * b.xx,
                 a.xy * b.v + a.x * b.y + a.y * b.x + a.v * b.xy,
                 a.yy * b.v + (a.y * b.y) * 2.0 + a.v * b.yy);
}
template <class T> inline Jet2<T> operator+(const Jet2<T>& a, double c) {
  Jet2<T> r = a;
  r.v = r.v + c;
  return r;
}
template <class T> inline Jet2<T> operator+(double c, const Jet2<T>& a) { return a + c; }
template <class T> inline Jet2<T> operator-(const Jet2<T>& a, double c) { return a + (-c); }
template <class T> inline Jet2<T> operator-(double c, const Jet2<T>& a) { return (-a) + c; }
template <class T> inline Jet2<T> operator*(const Jet2<T>& a, double c) {
  return Jet2<T>(a.v * c, a.x * c, a.y * c, a.xx * c, a.xy * c, a.yy * c);
}
template <class T> inline Jet2<T> operator*(double c, const Jet2<T>& a) { return a * c; }

template <class T> inline Jet2<T> reciprocal(const Jet2<T>& a) {
  if (value_of(a) == 0.0) throw Error(ErrorKind::Domain, "division by zero");
  T r = T(1.0) / a.v;
  T r2 = r * r;
  return chain(a, r, -r2, r2 * r * 2.0);
}
template <class T> inline Jet2<T> operator/(const Jet2<T>& a, const Jet2<T>& b) {
  return a * reciprocal(b);
}
template <class T> inline Jet2<T> operator/(const Jet2<T>& a, double c) {
  if (c == 0.0) throw Error(ErrorKind::Domain, "division by zero");
  return a * (1.0 / c);
}
template <class T> inline Jet2<T> operator/(double c, const Jet2<T>& a) { return reciprocal(a) * c; }

template <class T> inline Jet2<T>& operator+=(Jet2<T>& a, const Jet2<T>& b) { return a = a + b; }
template <class T> inline Jet2<T>& operator-=(Jet2<T>& a, const Jet2<T>& b) { return a = a - b; }
template <class T> inline Jet2<T>& operator*=(Jet2<T>& a, const Jet2<T>& b) { return a = a * b; }

// ---- Jet1 arithmetic

template <class T> inline Jet1<T> operator-(const Jet1<T>& a) { return Jet1<T>(-a.v, -a.x, -a.y); }
template <class T> inline Jet1<T> operator+(const Jet1<T>& a, const Jet1<T>& b) {
  return Jet1<T>(a.v + b.v, a.x + b.x, a.y + b.y);
}
template <class T> inline Jet1<T> operator-(const Jet1<T>& a, const Jet1<T>& b) {
  return Jet1<T>(a.v - b.v, a.x - b.x, a.y - b.y);
}
template <class T> inline Jet1<T> operator*(const Jet1<T>& a, const Jet1<T>& b) {
  return Jet1<T>(a.v * b.v, a.x * b.v + a.v * b.x, a.y * b.v + a.v * b.y);
}
template <class T> inline Jet1<T> operator+(const Jet1<T>& a, double c) { return Jet1<T>(a.v + c, a.x, a.y); }
template <class T> inline Jet1<T> operator+(double c, const Jet1<T>& a) { return a + c; }
template <class T> inline Jet1<T> operator-(const Jet1<T>& a, double c) { return Jet1<T>(a.v - c, a.x, a.y); }
template <class T> inline Jet1<T> operator-(double c, const Jet1<T>& a) { return (-a) + c; }
template <class T> inline Jet1<T> operator*(const Jet1<T>& a, double c) { return Jet1<T>(a.v * c, a.x * c, a.y * c); }
template <class T> inline Jet1<T> operator*(double c, const Jet1<T>& a) { return a * c; }
template <class T> inline Jet1<T> reciprocal(const Jet1<T>& a) {
  if (value_of(a) == 0.0) throw Error(ErrorKind::Domain, "division by zero");
  T r = T(1.0) / a.v;
  return chain(a, r, -(r * r));
}
template <class T> inline Jet1<T> operator/(const Jet1<T>& a, const Jet1<T>& b) { return a * reciprocal(b); }
template <class T> inline Jet1<T> operator/(const Jet1<T>& a, double c) { return a * (1.0 / c); }
template <class T> inline Jet1<T> operator/(double c, const Jet1<T>& a) { return reciprocal(a) * c; }

// First-order part of a second-order jet.
template <class T> inline Jet1<T> truncate(const Jet2<T>& a) { return Jet1<T>(a.v, a.x, a.y); }
// d/dX and d/dY of a second-order jet as first-order jets.
template <class T> inline Jet1<T> d_x(const Jet2<T>& a) { return Jet1<T>(a.x, a.xx, a.xy); }
template <class T> inline Jet1<T> d_y(const Jet2<T>& a) { return Jet1<T>(a.y, a.xy, a.yy); }

// ---- elementary functions, generic over double and nested jets

template <class J>
  requires is_jet_v<J>
inline J sin(const J& u) {
  using std::cos;
  using std::sin;
  auto s = sin(u.v), c = cos(u.v);
  if constexpr (std::is_same_v<J, Jet2<decltype(u.v)>>) return chain(u, s, c, -s);
  else return chain(u, s, c);
}
template <class J>
  requires is_jet_v<J>
inline J cos(const J& u) {
  using std::cos;
  using std::sin;
  auto s = sin(u.v), c = cos(u.v);
  if constexpr (std::is_same_v<J, Jet2<decltype(u.v)>>) return chain(u, c, -s, -c);
  else return chain(u, c, -s);
}
template <class J>
  requires is_jet_v<J>
inline J tan(const J& u) {
  using std::cos;
  using std::tan;
  if (std::cos(value_of(u)) == 0.0) throw Error(ErrorKind::Domain, "tan pole");
  auto t = tan(u.v);
  auto d = t * t + 1.0;
  if constexpr (std::is_same_v<J, Jet2<decltype(u.v)>>) return chain(u, t, d, d * t * 2.0);
  else return chain(u, t, d);
}
template <class J>
  requires is_jet_v<J>
inline J sinh(const J& u) {
  using std::cosh;
  using std::sinh;
  auto s = sinh(u.v), c = cosh(u.v);
  if constexpr (std::is_same_v<J, Jet2<decltype(u.v)>>) return chain(u, s, c, s);
  else return chain(u, s, c);
}
template <class J>
  requires is_jet_v<J>
inline J cosh(const J& u) {
  using std::cosh;
  using std::sinh;
  auto s = sinh(u.v), c = cosh(u.v);
  if constexpr (std::is_same_v<J, Jet2<decltype(u.v)>>) return chain(u, c, s, c);
  else return chain(u, c, s);
}
template <class J>
  requires is_jet_v<J>
inline J tanh(const J& u) {
  using std::tanh;
  auto t = tanh(u.v);
  auto d = 1.0 - t * t;
  if constexpr (std::is_same_v<J, Jet2<decltype(u.v)>>) return chain(u, t, d, d * t * -2.0);
  else return chain(u, t, d);
}
template <class J>
  requires is_jet_v<J>
inline J sech(const J& u) {
  using std::tanh;
  auto s = sech(u.v);
  auto t = tanh(u.v);
  // sech' = -sech tanh, sech'' = sech (tanh^2 - sech^2)
  if constexpr (std::is_same_v<J, Jet2<decltype(u.v)>>) return chain(u, s, -(s * t), s * (t * t - s * s));
  else return chain(u, s, -(s * t));
}
template <class J>
  requires is_jet_v<J>
inline J exp(const J& u) {
  using std::exp;
  auto e = exp(u.v);
  if constexpr (std::is_same_v<J, Jet2<decltype(u.v)>>) return chain(u, e, e, e);
  else return chain(u, e, e);
}
template <class J>
  requires is_jet_v<J>
inline J log(const J& u) {
  using std::log;
  if (!(value_of(u) > 0.0)) throw Error(ErrorKind::Domain, "ln of non-positive argument");
  auto r = 1.0 / u.v;
  if constexpr (std::is_same_v<J, Jet2<decltype(u.v)>>) return chain(u, log(u.v), r, -(r * r));
  else return chain(u, log(u.v), r);
}
template <class J>
  requires is_jet_v<J>
inline J sqrt(const J& u) {
  using std::sqrt;
  if (value_of(u) < 0.0) throw Error(ErrorKind::Domain, "sqrt of negative argument");
  if (value_of(u) == 0.0) throw Error(ErrorKind::NonDifferentiable, "sqrt at zero");
  auto s = sqrt(u.v);
  auto d = 0.5 / s;
  if constexpr (std::is_same_v<J, Jet2<decltype(u.v)>>) return chain(u, s, d, -(d / u.v) * 0.5);
  else return chain(u, s, d);
}
template <class J>
  requires is_jet_v<J>
inline J abs(const J& u) {
  double s = value_of(u);
  if (s == 0.0) throw Error(ErrorKind::NonDifferentiable, "abs at zero");
  return s > 0.0 ? u : -u;
}
template <class J>
  requires is_jet_v<J>
inline J asinh(const J& u) {
  using std::asinh;
  using std::sqrt;
  auto q = u.v * u.v + 1.0;
  auto d = 1.0 / sqrt(q);
  if constexpr (std::is_same_v<J, Jet2<decltype(u.v)>>) return chain(u, asinh(u.v), d, -(u.v * d) / q);
  else return chain(u, asinh(u.v), d);
}
template <class J>
  requires is_jet_v<J>
inline J asin(const J& u) {
  using std::asin;
  using std::sqrt;
  if (!(std::abs(value_of(u)) < 1.0)) throw Error(ErrorKind::Domain, "arcsin argument outside (-1, 1)");
  auto q = 1.0 - u.v * u.v;
  auto d = 1.0 / sqrt(q);
  if constexpr (std::is_same_v<J, Jet2<decltype(u.v)>>) return chain(u, asin(u.v), d, (u.v * d) / q);
  else return chain(u, asin(u.v), d);
}
template <class J>
  requires is_jet_v<J>
inline J acos(const J& u) {
  using std::acos;
  using std::sqrt;
  if (!(std::abs(value_of(u)) < 1.0)) throw Error(ErrorKind::Domain, "arccos argument outside (-1, 1)");
  auto q = 1.0 - u.v * u.v;
  auto d = -1.0 / sqrt(q);
  if constexpr (std::is_same_v<J, Jet2<decltype(u.v)>>) return chain(u, acos(u.v), d, (u.v * d) / q);
  else return chain(u, acos(u.v), d);
}

// Integer power by repeated squaring; works for any ring-like type.
template <class T>
inline T ipow(const T& base, long n) {
  if (n < 0) return T(1.0) / ipow(base, -n);
  T result(1.0), b = base;
  while (n > 0) {
    if (n & 1) result = result * b;
    b = b * b;
    n >>= 1;
  }
  return result;
}

template <class J>
  requires is_jet_v<J>
inline J pow(const J& u, double p) {
  using std::pow;
  double u0 = value_of(u);
  if (p == std::floor(p) && std::abs(p) < 1e9) {
    long n = static_cast<long>(p);
    if (n < 0 && u0 == 0.0) throw Error(ErrorKind::Domain, "division by zero");
    if (n == 0) return J(1.0);
    if (n == 1) return u;
    return ipow(u, n);
  }
  if (u0 < 0.0) throw Error(ErrorKind::Domain, "fractional power of negative argument");
  if (u0 == 0.0) throw Error(ErrorKind::NonDifferentiable, "fractional power at zero");
  auto f0 = pow(u.v, p);
  auto f1 = pow(u.v, p - 1.0) * p;
  if constexpr (std::is_same_v<J, Jet2<decltype(u.v)>>) return chain(u, f0, f1, pow(u.v, p - 2.0) * (p * (p - 1.0)));
  else return chain(u, f0, f1);
}

}  // namespace platemorph
