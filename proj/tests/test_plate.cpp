#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "platemorph/gallery.hpp"
#include "platemorph/plate.hpp"

using namespace platemorph;
constexpr double pi = std::numbers::pi;

namespace {

struct Sampled {
  ParamGrid axes;
  Grid2<Vec3<Jet2<double>>> jets;
};

Sampled sample(const ParametricSurface& s, int nx, int ny) {
  const Domain& d = s.domain();
  Sampled out{{{d.x_lo, d.x_hi, nx}, {d.y_lo, d.y_hi, ny}}, Grid2<Vec3<Jet2<double>>>(nx, ny)};
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) out.jets(i, j) = s.jets(out.axes.u.at(i), out.axes.v.at(j));
  return out;
}

}  // namespace

TEST(Plate, FlatPlateIsStressFree) {
  auto g = sample(gallery("plane"), 9, 9);
  auto r = verify_stress(g.axes, g.jets, synthesized_model(), 0.01);
  EXPECT_EQ(r.max_s0, 0.0);
  EXPECT_EQ(r.max_s1, 0.0);
  EXPECT_EQ(r.plate_residual, 0.0);
  auto st = plate_state(g.jets(4, 4), synthesized_growth(g.jets(4, 4)));
  EXPECT_NEAR(st.p0, 1.0, 1e-15);
  EXPECT_NEAR(st.r1[2], 1.0, 1e-15);
}

TEST(Plate, GalleryIsStressFree) {
  for (const char* name : {"ellipsoid", "cone", "catenoid", "torus"}) {
    auto g = sample(gallery(name), 41, 41);
    auto r = verify_stress(g.axes, g.jets, synthesized_model(), 0.01);
    EXPECT_LE(r.max_s0, 1e-10) << name;
    EXPECT_LE(r.max_s1, 1e-8) << name;
    EXPECT_LE(r.max_balance, 1e-9) << name;
    EXPECT_LE(r.max_closure, 1e-9) << name;
    EXPECT_LE(r.plate_residual, 1e-6) << name;
    EXPECT_LE(r.traction, 1e-8) << name;
    EXPECT_LE(r.moment, 1e-8) << name;
    EXPECT_TRUE(r.passes({})) << name;
  }
}

TEST(Plate, MissingBendingGrowthLeavesStress) {
  auto g = sample(gallery("torus"), 21, 21);
  GrowthModel flat_through_thickness = [](const Vec3<Jet2<double>>& r) {
    PointGrowth p = synthesized_growth(r);
    p.l1_1 = 0.0;
    return p;
  };
  auto r = verify_stress(g.axes, g.jets, flat_through_thickness, 0.01);
  EXPECT_LE(r.max_s0, 1e-10);
  EXPECT_GE(r.max_s1, 0.1);
  EXPECT_FALSE(r.passes({}));
}

TEST(Plate, TwistedCoordinatesLeaveStress) {
  auto g = sample(gallery("helicoid"), 11, 11);
  auto r = verify_stress(g.axes, g.jets, synthesized_model(), 0.01);
  EXPECT_LE(r.max_s0, 1e-10);
  EXPECT_GE(r.max_s1, 1.0);
}

TEST(Plate, WrongInPlaneGrowthLeavesMembraneStress) {
  auto g = sample(gallery("cone"), 11, 11);
  GrowthModel scaled = [](const Vec3<Jet2<double>>& r) {
    PointGrowth p = synthesized_growth(r);
    p.l1_0 = p.l1_0 * 1.01;
    return p;
  };
  auto r = verify_stress(g.axes, g.jets, scaled, 0.01);
  EXPECT_GE(r.max_s0, 1e-3);
}

TEST(PlateProperty, StressScalesWithModulus) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 0.95), k(0.1, 10.0);
  auto s = gallery("torus");
  for (int n = 0; n < 100; ++n) {
    auto r = s.jets(u(rng), u(rng));
    PointGrowth g = synthesized_growth(r);
    g.l1_1 *= 0.5;  // non-zero S1
    double c = k(rng);
    auto a = plate_state(r, g, 0.5), b = plate_state(r, g, 0.5 * c);
    for (int col = 0; col < 3; ++col)
      for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(b.S0.col[col][i], c * a.S0.col[col][i], 1e-12 * (1 + std::abs(c * a.S0.col[col][i])));
        EXPECT_NEAR(b.S1.col[col][i], c * a.S1.col[col][i], 1e-12 * (1 + std::abs(c * a.S1.col[col][i])));
      }
  }
}

TEST(PlateProperty, ClosureBracketsVanishUnderSynthesis) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.1, 5.0), w(-3.0, 3.0);
  for (int n = 0; n < 1000; ++n) {
    double l10 = u(rng), l20 = u(rng), L = w(rng), N = w(rng);
    auto [a, b] = closure_brackets(l10, l20, -L / l10, -N / l20, L, N);
    double scale = 1 + std::abs(L) * (l20 / l10 + l10 / l20) + std::abs(N) * (l20 / l10 + l10 / l20);
    EXPECT_NEAR(a, 0.0, 1e-12 * scale);
    EXPECT_NEAR(b, 0.0, 1e-12 * scale);
    auto [c, d] = closure_brackets(l10, l20, -L / l10 + 0.1, -N / l20, L, N);
    EXPECT_GT(std::abs(c) + std::abs(d), 0.05);
  }
}

TEST(PlateProperty, PerturbedBendingGrowthBreaksClosure) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.05, 0.95), p(-0.5, 0.5);
  for (const char* name : {"torus", "catenoid", "ellipsoid"}) {
    auto s = gallery(name);
    for (int n = 0; n < 20; ++n) {
      auto r = s.jets(u(rng), u(rng));
      PointGrowth g = synthesized_growth(r);
      g.l1_1 += p(rng);
      g.l2_1 += p(rng);
      auto st = plate_state(r, g);
      EXPECT_GT(std::abs(st.closure_24) + std::abs(st.closure_25), 1e-6) << name;
      EXPECT_GT(st.S1.max_abs(), 1e-6) << name;
    }
  }
}

TEST(PlateResidual, DivergenceFreeField) {
  const int n = 21;
  const double h = 1.0 / (n - 1);
  Grid2<Stress3> S(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double u = i * h, v = j * h;
      S(i, j).col[0] = Vec3d(std::sin(v) + u * v, 0.0, u * u);
      S(i, j).col[1] = Vec3d(-0.5 * v * v, std::exp(u), -2 * u * v);
    }
  EXPECT_LE(plate_residual(S, h, h), 1e-10);
}

TEST(PlateResidual, KnownDivergence) {
  const int n = 31;
  const double h = 1.0 / (n - 1);
  Grid2<Stress3> S(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      S(i, j).col[0] = Vec3d(std::sin(pi * i * h), 0.0, 0.0);
    }
  // max |pi cos(pi u)| over interior nodes with centred stencils
  double expect = 0.0;
  for (int i = 4; i < n - 4; ++i) expect = std::max(expect, std::abs(pi * std::cos(pi * i * h)));
  EXPECT_NEAR(plate_residual(S, h, h), expect, 1e-9);
}

TEST(PlateExport, StressCsv) {
  auto g = sample(gallery("cone"), 5, 4);
  auto r = verify_stress(g.axes, g.jets, synthesized_model(), 0.01);
  std::ostringstream out;
  write_stress_csv(out, r);
  std::string t = out.str();
  EXPECT_EQ(t.substr(0, t.find('\n')), "X,Y,S0_max,S1_max,s1_balance");
  EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 21);
  EXPECT_NE(stress_summary(r).find("max |S1|"), std::string::npos);
}

TEST(StressTolerance, DerivedFromS1) {
  auto t = StressTolerance::from_s1(1e-8);
  StressTolerance d;
  EXPECT_DOUBLE_EQ(t.s0, d.s0);
  EXPECT_DOUBLE_EQ(t.s1, d.s1);
  EXPECT_DOUBLE_EQ(t.balance, d.balance);
  EXPECT_DOUBLE_EQ(t.plate, d.plate);
  EXPECT_DOUBLE_EQ(t.boundary, d.boundary);
}
