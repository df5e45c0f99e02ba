#pragma once

// Thickness-expanded plate quantities and stress residuals for a surface
// paired with growth functions. Stresses are reported in units of 2 C0 unless
// a different prefactor is given.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>

#include "finite_difference.hpp"
#include "forms.hpp"
#include "growth.hpp"
#include "io.hpp"
#include "jet.hpp"
#include "vec3.hpp"

namespace platemorph {

using J1 = Jet1<double>;
using V1 = Vec3<J1>;

inline Vec3d val(const V1& a) { return {a[0].v, a[1].v, a[2].v}; }
inline Vec3d dX(const V1& a) { return {a[0].x, a[1].x, a[2].x}; }
inline Vec3d dY(const V1& a) { return {a[0].y, a[1].y, a[2].y}; }

// Nominal stress coefficient as three columns: S = c0 (x) e1 + c1 (x) e2 + c2 (x) k.
struct Stress3 {
  std::array<Vec3d, 3> col{};

  double max_abs() const { return std::max({platemorph::max_abs(col[0]), platemorph::max_abs(col[1]), platemorph::max_abs(col[2])}); }
  Stress3 operator+(const Stress3& o) const {
    Stress3 r;
    for (int k = 0; k < 3; ++k) r.col[k] = col[k] + o.col[k];
    return r;
  }
  Stress3 operator*(double s) const {
    Stress3 r;
    for (int k = 0; k < 3; ++k) r.col[k] = col[k] * s;
    return r;
  }
};

// Growth at a point: order-0 values with first partials, order-1 values.
struct PointGrowth {
  J1 l1_0, l2_0;
  double l1_1 = 0.0, l2_1 = 0.0;
};

struct PlateState {
  Vec3d r0, r1, r2;
  double p0 = 0, p1 = 0;
  double Lambda0 = 0, Lambda1 = 0;
  Vec3d rN, N, s1, s2, sbar, t1, t2, q1, q2, hbar;
  double Delta = 0;
  double C0 = 0.5, h = 0.01;
  Stress3 S0, S1;
  double s1_balance = 0.0;  // residual norm of the third S1 = 0 equation
  double closure_24 = 0.0, closure_25 = 0.0;
};

// Order-0 growth from the stress-free conditions with partials from the jets.
inline PointGrowth synthesized_growth(const Vec3<Jet2<double>>& r) {
  V1 rX, rY;
  for (int k = 0; k < 3; ++k) {
    rX[k] = d_x(r[k]);
    rY[k] = d_y(r[k]);
  }
  PointGrowth g;
  g.l1_0 = sqrt(dot(rX, rX));
  g.l2_0 = sqrt(dot(rY, rY));
  FundamentalForms f = forms_from_jets(r, 0.0);
  g.l1_1 = -f.L / g.l1_0.v;
  g.l2_1 = -f.N / g.l2_0.v;
  return g;
}

// Brackets multiplying r,X and r,Y in the two non-trivial S1 = 0 equations
// for an orthogonal net with lambda^(0) = (sqrt E, sqrt G). Both vanish when
// M = 0 and lambda^(1) = (-L/lambda1, -N/lambda2).
inline std::pair<double, double> closure_brackets(double l10, double l20, double l11, double l21, double L, double N) {
  double Lambda1 = l11 * l20 + l21 * l10;
  double common = 3.0 * Lambda1 + 2.0 * (l20 * l20 * L + l10 * l10 * N) / (l10 * l20);
  double diff = l21 * l10 - l11 * l20;
  return {common + 2.0 * l20 * L / l10 - diff, common + 2.0 * l10 * N / l20 + diff};
}

inline PlateState plate_state(const Vec3<Jet2<double>>& r, const PointGrowth& g, double C0 = 0.5, double h = 0.01) {
  const double c2 = 2.0 * C0;
  V1 rX, rY;
  Vec3d rXX, rXY, rYY;
  for (int k = 0; k < 3; ++k) {
    rX[k] = d_x(r[k]);
    rY[k] = d_y(r[k]);
    rXX[k] = r[k].xx;
    rXY[k] = r[k].xy;
    rYY[k] = r[k].yy;
  }
  if (!(g.l1_0.v > 0.0) || !(g.l2_0.v > 0.0)) throw Error(ErrorKind::Degenerate, "growth must be positive");
  PlateState s;
  s.C0 = C0;
  s.h = h;
  s.r0 = Vec3d(r[0].v, r[1].v, r[2].v);

  V1 rN1 = cross(rX, rY);
  J1 D2 = dot(rN1, rN1);
  if (!(D2.v > 0.0)) throw Error(ErrorKind::Singular, "singular point (r_X x r_Y = 0)");
  J1 D = sqrt(D2);
  J1 L0 = g.l1_0 * g.l2_0;
  const double Lam1 = g.l1_1 * g.l2_0.v + g.l2_1 * g.l1_0.v;

  const Vec3d rx = val(rX), ry = val(rY), rN = val(rN1);
  const Vec3d rN_X = dX(rN1), rN_Y = dY(rN1);
  const double d = D.v, l0 = L0.v;
  const double l10 = g.l1_0.v, l20 = g.l2_0.v;

  V1 t1 = rX * (g.l2_0 / g.l1_0);
  V1 t2 = rY * (g.l1_0 / g.l2_0);
  J1 a2 = (L0 * L0) / D2;
  V1 q1 = cross(rN1, rX) * a2;
  V1 q2 = cross(rN1, rY) * a2;
  Vec3d sbar = cross(rN_X, ry) - cross(rN_Y, rx);
  const double d2 = d * d, d4 = d2 * d2, d6 = d4 * d2;
  Vec3d hbar = dX(t1) + dY(t2) - sbar * (l0 * l0 * l0 / d4) + rN * (l0 * Lam1 / d2) + (dX(q2) - dY(q1)) * (l0 / d2);

  s.Lambda0 = l0;
  s.Lambda1 = Lam1;
  s.rN = rN;
  s.Delta = d;
  s.N = rN / d;
  s.s1 = cross(rN, rx);
  s.s2 = cross(rN, ry);
  s.sbar = sbar;
  s.t1 = val(t1);
  s.t2 = val(t2);
  s.q1 = val(q1);
  s.q2 = val(q2);
  s.hbar = hbar;

  const double sr = dot(sbar, rN), hr = dot(hbar, rN);
  s.r1 = s.N * (l0 / d);
  s.p0 = l0 * l0 / d;
  s.r2 = hbar * (-1.0 / l0) + rN * (Lam1 / d2 - l0 * l0 * sr / d6 + hr / (l0 * d2));
  s.p1 = c2 * (l0 * Lam1 / d2 - l0 * l0 * l0 * sr / d6 + hr / d2);

  const Vec3d nxY = cross(rN, ry), nxX = cross(rN, rx);
  s.S0.col[0] = (nxY * (l0 * l0 * l0 / d4) + rx * (l20 / l10)) * c2;
  s.S0.col[1] = (nxX * (-l0 * l0 * l0 / d4) + ry * (l10 / l20)) * c2;

  const double cbr = l0 * Lam1 - l0 * l0 * l0 * sr / d4 + hr;
  V1 f1 = rN1 * (L0 / D2);
  V1 g1 = cross(rN1, rY) * (L0 / D2);
  V1 g2 = cross(rN1, rX) * (L0 / D2);
  const double l04 = l0 * l0 * l0 * l0;
  const double diff = g.l2_1 * l10 - g.l1_1 * l20;
  s.S1.col[0] = (cross(rN, rN_Y) * (l04 / d6) + cross(ry, hbar) * (l0 / d2) + rx * (diff / (l10 * l10)) +
                 nxY * (2.0 * l0 / d4 * cbr) + dX(f1) * (l20 / l10)) *
                c2;
  s.S1.col[1] = (cross(rN, rN_X) * (-l04 / d6) - cross(rx, hbar) * (l0 / d2) + ry * (-diff / (l20 * l20)) -
                 nxX * (2.0 * l0 / d4 * cbr) + dY(f1) * (l10 / l20)) *
                c2;
  s.S1.col[2] = (hbar * -1.0 + rN * (l0 * Lam1 / d2) + (dY(g2) - dX(g1)) * (l0 * l0 / d2)) * c2;

  // third S1 = 0 equation after substituting Lambda0 = Delta
  V1 u1 = cross(rN1, rY) / D, u2 = cross(rN1, rX) / D;
  s.s1_balance = norm(hbar - rN * (Lam1 / d) + dX(u1) - dY(u2));

  const double L = dot(rXX, s.N), N = dot(rYY, s.N);
  auto [b24, b25] = closure_brackets(l10, l20, g.l1_1, g.l2_1, L, N);
  s.closure_24 = b24;
  s.closure_25 = b25;
  (void)rXY;
  return s;
}

// Growth model used by grid verification: maps a position jet to growth.
using GrowthModel = std::function<PointGrowth(const Vec3<Jet2<double>>&)>;

inline GrowthModel synthesized_model() { return [](const Vec3<Jet2<double>>& r) { return synthesized_growth(r); }; }

struct StressTolerance {
  double s0 = 1e-10, s1 = 1e-8, balance = 1e-9, plate = 1e-6, boundary = 1e-8;

  // Derive all thresholds from the S1 threshold, keeping the default ratios.
  static StressTolerance from_s1(double t) { return {t * 1e-2, t, t * 1e-1, t * 1e2, t}; }
};

struct StressReport {
  ParamGrid axes;
  Grid2<double> s0, s1, balance;
  double max_s0 = 0, max_s1 = 0, max_balance = 0;
  double max_closure = 0;
  double plate_residual = 0;
  double traction = 0, moment = 0;

  bool passes(const StressTolerance& t) const {
    return max_s0 <= t.s0 && max_s1 <= t.s1 && max_balance <= t.balance && plate_residual <= t.plate &&
           traction <= t.boundary && moment <= t.boundary;
  }
};

// Divergence d/du (S e1) + d/dv (S e2) of the thickness-averaged stress.
inline double plate_residual(const Grid2<Stress3>& Sbar, double hu, double hv) {
  if (Sbar.nx < 3 || Sbar.ny < 3) throw Error(ErrorKind::Config, "plate residual needs at least 3 points per axis");
  GridDiff D(Sbar.nx, Sbar.ny, hu, hv);
  double worst = 0.0;
  for (int j = D.margin_y(); j < Sbar.ny - D.margin_y(); ++j)
    for (int i = D.margin_x(); i < Sbar.nx - D.margin_x(); ++i) {
      Vec3d div;
      for (int c = 0; c < 3; ++c) {
        div[c] = D.sx.apply(i, 1, [&](int k) { return Sbar(k, j).col[0][c]; }) +
                 D.sy.apply(j, 1, [&](int k) { return Sbar(i, k).col[1][c]; });
      }
      worst = std::max(worst, norm(div));
    }
  return worst;
}

// Edge traction of the averaged stress and the bending moment about the
// mid-plane, maximised over boundary nodes of a rectangular grid.
inline std::pair<double, double> boundary_residuals(const Grid2<PlateState>& st) {
  // three-point Gauss-Legendre on [0, 1]; the moment integrand is cubic in Z
  const double gx[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  double trac = 0.0, mom = 0.0;
  auto visit = [&](int i, int j, double n1, double n2) {
    const PlateState& s = st(i, j);
    const double h = s.h;
    Stress3 Sbar = s.S0 + s.S1 * (0.5 * h);
    trac = std::max(trac, norm(Sbar.col[0] * n1 + Sbar.col[1] * n2));
    Vec3d m;
    for (int q = 0; q < 3; ++q) {
      double Z = gx[q] * h;
      Vec3d t = (s.S0.col[0] + s.S1.col[0] * Z) * n1 + (s.S0.col[1] + s.S1.col[1] * Z) * n2;
      Vec3d arm = s.r1 * (Z - 0.5 * h) + s.r2 * (0.5 * (Z * Z - 0.25 * h * h));
      m += cross(t, arm) * gw[q];
    }
    mom = std::max(mom, norm(m));
  };
  for (int i = 0; i < st.nx; ++i) {
    visit(i, 0, 0.0, -1.0);
    visit(i, st.ny - 1, 0.0, 1.0);
  }
  for (int j = 0; j < st.ny; ++j) {
    visit(0, j, -1.0, 0.0);
    visit(st.nx - 1, j, 1.0, 0.0);
  }
  return {trac, mom};
}

// Full certificate over a grid of position jets.
inline StressReport verify_stress(const ParamGrid& axes, const Grid2<Vec3<Jet2<double>>>& jets, const GrowthModel& model,
                                  double h, double C0 = 0.5) {
  const int nx = jets.nx, ny = jets.ny;
  StressReport rep;
  rep.axes = axes;
  rep.s0 = Grid2<double>(nx, ny);
  rep.s1 = Grid2<double>(nx, ny);
  rep.balance = Grid2<double>(nx, ny);
  Grid2<PlateState> st(nx, ny);
  Grid2<Stress3> Sbar(nx, ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      PlateState s = plate_state(jets(i, j), model(jets(i, j)), C0, h);
      rep.s0(i, j) = s.S0.max_abs();
      rep.s1(i, j) = s.S1.max_abs();
      rep.balance(i, j) = s.s1_balance;
      rep.max_s0 = std::max(rep.max_s0, rep.s0(i, j));
      rep.max_s1 = std::max(rep.max_s1, rep.s1(i, j));
      rep.max_balance = std::max(rep.max_balance, rep.balance(i, j));
      rep.max_closure = std::max({rep.max_closure, std::abs(s.closure_24), std::abs(s.closure_25)});
      Sbar(i, j) = s.S0 + s.S1 * (0.5 * h);
      st(i, j) = s;
    }
  rep.plate_residual = plate_residual(Sbar, axes.u.spacing(), axes.v.spacing());
  std::tie(rep.traction, rep.moment) = boundary_residuals(st);
  return rep;
}

inline void write_stress_csv(std::ostream& out, const StressReport& r, const std::string& u = "X",
                             const std::string& v = "Y") {
  out << u << ',' << v << ",S0_max,S1_max,s1_balance\n";
  for (int j = 0; j < r.s0.ny; ++j)
    for (int i = 0; i < r.s0.nx; ++i)
      write_csv_row(out, {r.axes.u.at(i), r.axes.v.at(j), r.s0(i, j), r.s1(i, j), r.balance(i, j)});
}

inline std::string stress_summary(const StressReport& r) {
  std::string s;
  s += "max |S0|          " + fmt17(r.max_s0) + "\n";
  s += "max |S1|          " + fmt17(r.max_s1) + "\n";
  s += "S1 balance        " + fmt17(r.max_balance) + "\n";
  s += "closure brackets  " + fmt17(r.max_closure) + "\n";
  s += "plate residual    " + fmt17(r.plate_residual) + "\n";
  s += "edge traction     " + fmt17(r.traction) + "\n";
  s += "edge moment       " + fmt17(r.moment) + "\n";
  return s;
}

}  // namespace platemorph
