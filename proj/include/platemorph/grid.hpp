#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"

namespace platemorph {

struct Axis1 {
  double lo = 0.0, hi = 1.0;
  int n = 2;

  double at(int i) const { return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1); }
  double spacing() const { return n > 1 ? (hi - lo) / (n - 1) : 0.0; }
};

// Values on an nx-by-ny lattice; i runs along the first parameter and is the
// fastest-varying index in storage.
template <class T>
struct Grid2 {
  int nx = 0, ny = 0;
  std::vector<T> data;

  Grid2() = default;
  Grid2(int nx_, int ny_, const T& fill = T()) : nx(nx_), ny(ny_), data(static_cast<std::size_t>(nx_) * ny_, fill) {}

  T& operator()(int i, int j) { return data[static_cast<std::size_t>(j) * nx + i]; }
  const T& operator()(int i, int j) const { return data[static_cast<std::size_t>(j) * nx + i]; }

  template <class F>
  auto map(F f) const {
    using R = decltype(f(data[0]));
    Grid2<R> out(nx, ny);
    for (std::size_t k = 0; k < data.size(); ++k) out.data[k] = f(data[k]);
    return out;
  }
};

struct ParamGrid {
  Axis1 u, v;

  int nx() const { return u.n; }
  int ny() const { return v.n; }
};

inline void require_resolution(int nx, int ny, int min = 3) {
  if (nx < min || ny < min)
    throw Error(ErrorKind::Config, "grid needs at least " + std::to_string(min) + " points per axis");
}

}  // namespace platemorph
