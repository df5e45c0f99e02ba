#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "finite_difference.hpp"
#include "grid.hpp"
#include "surface.hpp"

namespace platemorph {

// Fundamental-form coefficients in any scalar type (plain or jet).
template <class S>
struct FormCoefficients {
  S E, F, G, L, M, N;
};

// Forms from the second-order jet of a position vector. The normal is
// r_X x r_Y and is never flipped.
template <class S>
inline FormCoefficients<S> coefficients_from_jets(const Vec3<Jet2<S>>& r) {
  using std::sqrt;
  auto rX = map(r, [](const Jet2<S>& a) { return a.x; });
  auto rY = map(r, [](const Jet2<S>& a) { return a.y; });
  auto rXX = map(r, [](const Jet2<S>& a) { return a.xx; });
  auto rXY = map(r, [](const Jet2<S>& a) { return a.xy; });
  auto rYY = map(r, [](const Jet2<S>& a) { return a.yy; });
  Vec3<S> rN = cross(rX, rY);
  S delta = sqrt(dot(rN, rN));
  return {dot(rX, rX), dot(rX, rY), dot(rY, rY), dot(rXX, rN) / delta, dot(rXY, rN) / delta, dot(rYY, rN) / delta};
}

struct FundamentalForms {
  double E = 1, F = 0, G = 1, L = 0, M = 0, N = 0;
  double Delta = 1;
  Vec3d r, rX, rY, rN, n;
};

// Points with Delta below this fraction of diag^2 are treated as singular.
inline constexpr double kRegularity = 1e-12;

inline FundamentalForms forms_from_jets(const Vec3<Jet2<double>>& r, double diag = 1.0) {
  FundamentalForms f;
  for (int k = 0; k < 3; ++k) {
    f.r[k] = r[k].v;
    f.rX[k] = r[k].x;
    f.rY[k] = r[k].y;
  }
  f.rN = cross(f.rX, f.rY);
  f.Delta = norm(f.rN);
  if (!(f.Delta >= kRegularity * diag * diag)) throw Error(ErrorKind::Singular, "singular point (r_X x r_Y = 0)");
  f.n = f.rN / f.Delta;
  Vec3d rXX(r[0].xx, r[1].xx, r[2].xx), rXY(r[0].xy, r[1].xy, r[2].xy), rYY(r[0].yy, r[1].yy, r[2].yy);
  f.E = dot(f.rX, f.rX);
  f.F = dot(f.rX, f.rY);
  f.G = dot(f.rY, f.rY);
  f.L = dot(rXX, f.n);
  f.M = dot(rXY, f.n);
  f.N = dot(rYY, f.n);
  return f;
}

inline FundamentalForms forms_at(const ParametricSurface& s, double X, double Y) {
  try {
    return forms_from_jets(s.jets(X, Y), s.diagonal());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Singular || e.kind() == ErrorKind::Domain || e.kind() == ErrorKind::NonDifferentiable) {
      char buf[96];
      std::snprintf(buf, sizeof buf, " at (X, Y) = (%.6g, %.6g)", X, Y);
      throw Error(e.kind(), e.what() + std::string(buf));
    }
    throw;
  }
}

struct FormsGrid {
  ParamGrid axes;
  Grid2<FundamentalForms> f;

  int nx() const { return f.nx; }
  int ny() const { return f.ny; }
  Grid2<double> component(double FundamentalForms::*m) const {
    return f.map([m](const FundamentalForms& q) { return q.*m; });
  }
};

inline FormsGrid sample_forms(const ParametricSurface& s, int nx, int ny) {
  require_resolution(nx, ny);
  FormsGrid g;
  const Domain& d = s.domain();
  g.axes = {{d.x_lo, d.x_hi, nx}, {d.y_lo, d.y_hi, ny}};
  g.f = Grid2<FundamentalForms>(nx, ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) g.f(i, j) = forms_at(s, g.axes.u.at(i), g.axes.v.at(j));
  return g;
}

inline void write_forms_csv(std::ostream& out, const FormsGrid& g) {
  out << "X,Y,E,F,G,L,M,N,Delta\n";
  char buf[512];
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const auto& q = g.f(i, j);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", g.axes.u.at(i),
                    g.axes.v.at(j), q.E, q.F, q.G, q.L, q.M, q.N, q.Delta);
      out << buf;
    }
}

// Orthogonal-net compatibility residuals (F = M = 0), maximised over grid
// points whose stencils are centred:
//   gauss   = LN/sqrt(EG) + 1/2 [ (G_u/sqrt(EG))_u + (E_v/sqrt(EG))_v ]
//   codazzi = L_v - E_v/2 (L/E + N/G),   N_u - G_u/2 (L/E + N/G)
struct CompatibilityResidual {
  double gauss = 0, codazzi_1 = 0, codazzi_2 = 0;
  double max() const { return std::max({gauss, codazzi_1, codazzi_2}); }
};

inline CompatibilityResidual gauss_codazzi_residual(const Grid2<double>& E, const Grid2<double>& G,
                                                    const Grid2<double>& L, const Grid2<double>& N, double hu,
                                                    double hv) {
  if (E.nx < 3 || E.ny < 3) throw Error(ErrorKind::Config, "compatibility check needs at least 3 points per axis");
  GridDiff D(E.nx, E.ny, hu, hv);
  CompatibilityResidual r;
  const int mx = D.margin_x(), my = D.margin_y();
  for (int j = my; j < E.ny - my; ++j)
    for (int i = mx; i < E.nx - mx; ++i) {
      double e = E(i, j), g = G(i, j), l = L(i, j), n = N(i, j);
      double Eu = D.dx(E, i, j), Ev = D.dy(E, i, j), Gu = D.dx(G, i, j), Gv = D.dy(G, i, j);
      double Evv = D.dy(E, i, j, 2), Guu = D.dx(G, i, j, 2);
      double w = std::sqrt(e * g);
      double wu = (Eu * g + e * Gu) / (2.0 * w), wv = (Ev * g + e * Gv) / (2.0 * w);
      double gauss = l * n / w + 0.5 * ((Guu * w - Gu * wu) / (w * w) + (Evv * w - Ev * wv) / (w * w));
      double k = l / e + n / g;
      double c1 = D.dy(L, i, j) - 0.5 * Ev * k;
      double c2 = D.dx(N, i, j) - 0.5 * Gu * k;
      r.gauss = std::max(r.gauss, std::abs(gauss));
      r.codazzi_1 = std::max(r.codazzi_1, std::abs(c1));
      r.codazzi_2 = std::max(r.codazzi_2, std::abs(c2));
    }
  return r;
}

inline CompatibilityResidual gauss_codazzi_residual(const FormsGrid& g) {
  return gauss_codazzi_residual(g.component(&FundamentalForms::E), g.component(&FundamentalForms::G),
                                g.component(&FundamentalForms::L), g.component(&FundamentalForms::N),
                                g.axes.u.spacing(), g.axes.v.spacing());
}

}  // namespace platemorph
