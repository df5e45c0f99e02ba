#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "grid.hpp"

namespace platemorph {

// Fornberg's recursion: weights c[k][j] for the k-th derivative at z from
// samples at nodes x[0..n-1], for k = 0..m.
inline std::vector<std::vector<double>> fornberg_weights(double z, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    int mn = std::min(i, m);
    double c2 = 1.0, c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

// First and second derivative stencils on a uniform axis. Interior nodes get
// centred stencils of up to nine points; nodes near the ends use the same
// width shifted inward.
class AxisStencils {
 public:
  AxisStencils() = default;
  AxisStencils(int n, double h, int max_width = 9) : n_(n) {
    width_ = std::min(n, max_width);
    if (width_ % 2 == 0 && width_ > 1) --width_;
    half_ = width_ / 2;
    start_.resize(n);
    d1_.resize(n);
    d2_.resize(n);
    for (int i = 0; i < n; ++i) {
      int s = std::clamp(i - half_, 0, std::max(0, n - width_));
      start_[i] = s;
      std::vector<double> x(width_);
      for (int k = 0; k < width_; ++k) x[k] = (s + k - i) * h;
      auto w = fornberg_weights(0.0, x, 2);
      d1_[i] = w[1];
      d2_[i] = w[2];
    }
  }

  int half_width() const { return half_; }
  int size() const { return n_; }

  // order 1 or 2 derivative at node i of samples f(k), k = 0..n-1
  template <class F>
  double apply(int i, int order, F f) const {
    const auto& w = order == 1 ? d1_[i] : d2_[i];
    double s = 0.0;
    for (int k = 0; k < width_; ++k) s += w[k] * f(start_[i] + k);
    return s;
  }

 private:
  int n_ = 0, width_ = 1, half_ = 0;
  std::vector<int> start_;
  std::vector<std::vector<double>> d1_, d2_;
};

// Partial derivatives of a scalar grid.
struct GridDiff {
  AxisStencils sx, sy;

  GridDiff(int nx, int ny, double hx, double hy) : sx(nx, hx), sy(ny, hy) {}

  double dx(const Grid2<double>& g, int i, int j, int order = 1) const {
    return sx.apply(i, order, [&](int k) { return g(k, j); });
  }
  double dy(const Grid2<double>& g, int i, int j, int order = 1) const {
    return sy.apply(j, order, [&](int k) { return g(i, k); });
  }
  double dxy(const Grid2<double>& g, int i, int j) const {
    return sy.apply(j, 1, [&](int k) { return sx.apply(i, 1, [&](int m) { return g(m, k); }); });
  }
  // Indices whose stencils in both directions are centred.
  int margin_x() const { return sx.half_width(); }
  int margin_y() const { return sy.half_width(); }
};

struct LagrangeWeights {
  int start = 0;
  std::vector<double> w;

  double apply(const std::vector<double>& f) const {
    double r = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) r += w[k] * f[start + k];
    return r;
  }
};

// Weights for interpolating n uniform samples at t from `points` nodes around it.
inline LagrangeWeights lagrange_weights(int n, double lo, double h, double t, int points = 6) {
  points = std::min(points, n);
  double s = (t - lo) / h;
  int start = static_cast<int>(std::floor(s)) - (points / 2 - 1);
  start = std::clamp(start, 0, n - points);
  std::vector<double> x(points);
  for (int k = 0; k < points; ++k) x[k] = (start + k) * h;
  return {start, fornberg_weights(t - lo, x, 0)[0]};
}

// Lagrange interpolation on a uniform axis using `points` nodes around t.
inline double lagrange_uniform(const std::vector<double>& f, double lo, double h, double t, int points = 6) {
  return lagrange_weights(static_cast<int>(f.size()), lo, h, t, points).apply(f);
}

}  // namespace platemorph
