#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace platemorph {

template <class T>
struct Vec3 {
  std::array<T, 3> c{};

  Vec3() : c{T(0.0), T(0.0), T(0.0)} {}
  Vec3(const T& a, const T& b, const T& d) : c{a, b, d} {}

  T& operator[](int i) { return c[i]; }
  const T& operator[](int i) const { return c[i]; }
};

using Vec3d = Vec3<double>;

template <class T> inline Vec3<T> operator+(const Vec3<T>& a, const Vec3<T>& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
template <class T> inline Vec3<T> operator-(const Vec3<T>& a, const Vec3<T>& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
template <class T> inline Vec3<T> operator-(const Vec3<T>& a) { return {-a[0], -a[1], -a[2]}; }
template <class T, class S> inline Vec3<T> operator*(const S& s, const Vec3<T>& a) {
  return {a[0] * s, a[1] * s, a[2] * s};
}
template <class T, class S> inline Vec3<T> operator*(const Vec3<T>& a, const S& s) {
  return {a[0] * s, a[1] * s, a[2] * s};
}
template <class T, class S> inline Vec3<T> operator/(const Vec3<T>& a, const S& s) {
  return {a[0] / s, a[1] / s, a[2] / s};
}
template <class T> inline Vec3<T>& operator+=(Vec3<T>& a, const Vec3<T>& b) { return a = a + b; }
template <class T> inline Vec3<T>& operator-=(Vec3<T>& a, const Vec3<T>& b) { return a = a - b; }

template <class T> inline T dot(const Vec3<T>& a, const Vec3<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
template <class T> inline Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3d& a) { return std::sqrt(dot(a, a)); }
inline double max_abs(const Vec3d& a) {
  return std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2])});
}

// Componentwise projection of a vector of jets.
template <class T, class F> inline auto map(const Vec3<T>& a, F f) {
  using R = decltype(f(a[0]));
  return Vec3<R>(f(a[0]), f(a[1]), f(a[2]));
}

}  // namespace platemorph
