#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "platemorph/forms.hpp"
#include "platemorph/gallery.hpp"
#include "platemorph/io.hpp"

using namespace platemorph;
constexpr double pi = std::numbers::pi;

TEST(Forms, ConeAtMidpoint) {
  auto f = forms_at(gallery("cone"), 0.5, 0.25);
  EXPECT_NEAR(f.E, 2.0, 1e-12);
  EXPECT_NEAR(f.F, 0.0, 1e-12);
  EXPECT_NEAR(f.G, pi * pi, 1e-12);
  EXPECT_NEAR(f.M, 0.0, 1e-12);
  EXPECT_NEAR(f.Delta, std::sqrt(2.0) * pi, 1e-12);
}

TEST(Forms, HelicoidTwist) {
  auto s = gallery("helicoid");
  for (double X : {0.1, 0.4, 0.9}) {
    auto f = forms_at(s, X, 0.3);
    EXPECT_NEAR(f.M, 4 * pi / std::sqrt(1 + 4 * pi * pi * X * X), 1e-12);
    EXPECT_NEAR(f.F, 0.0, 1e-12);
    EXPECT_NEAR(f.L, 0.0, 1e-12);
    EXPECT_NEAR(f.N, 0.0, 1e-12);
  }
}

TEST(Forms, PlaneIsFlat) {
  auto f = forms_at(gallery("plane"), 0.3, 0.7);
  EXPECT_EQ(f.E, 1.0);
  EXPECT_EQ(f.G, 1.0);
  EXPECT_EQ(f.F, 0.0);
  EXPECT_EQ(f.L, 0.0);
  EXPECT_EQ(f.M, 0.0);
  EXPECT_EQ(f.N, 0.0);
}

TEST(Forms, NormalFollowsParameterOrder) {
  // mirrored torus: r_X x r_Y points away from the axis on the outer equator
  auto f = forms_at(gallery("torus"), 0.0, 0.0);
  EXPECT_NEAR(f.n[0], 1.0, 1e-12);
  EXPECT_NEAR(f.n[1], 0.0, 1e-12);
}

TEST(Forms, ApexIsSingular) {
  auto cone = ParametricSurface::from_strings("X*sin(2*pi*Y)", "X*cos(2*pi*Y)", "X", {0, 1, 0, 1});
  try {
    forms_at(cone, 0.0, 0.3);
    FAIL() << "expected a singular-point error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Singular);
    EXPECT_NE(std::string(e.what()).find("0.3"), std::string::npos);
  }
}

TEST(FormsProperty, SecondFormIsTripleProduct) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (const auto& name : gallery_names()) {
    auto s = gallery(name);
    for (int k = 0; k < 50; ++k) {
      double X = u(rng), Y = u(rng);
      auto r = s.jets(X, Y);
      Vec3d rX{r[0].x, r[1].x, r[2].x}, rY{r[0].y, r[1].y, r[2].y};
      Vec3d rXX{r[0].xx, r[1].xx, r[2].xx}, rXY{r[0].xy, r[1].xy, r[2].xy}, rYY{r[0].yy, r[1].yy, r[2].yy};
      Vec3d c = cross(rX, rY);
      double d = norm(c);
      auto f = forms_at(s, X, Y);
      double tol = 1e-12 * (1 + std::abs(f.E) + std::abs(f.G));
      EXPECT_NEAR(f.L, dot(rXX, c) / d, tol) << name;
      EXPECT_NEAR(f.M, dot(rXY, c) / d, tol) << name;
      EXPECT_NEAR(f.N, dot(rYY, c) / d, tol) << name;
      EXPECT_NEAR(f.E * f.G - f.F * f.F, d * d, 1e-10 * d * d) << name;
    }
  }
}

TEST(FormsProperty, RigidMotionInvariance) {
  // rotation about (1, 2, 2)/3 by 0.7 rad followed by a translation
  const double a = 0.7, c = std::cos(a), s = std::sin(a);
  const double k[3] = {1.0 / 3, 2.0 / 3, 2.0 / 3};
  double R[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) R[i][j] = (i == j ? c : 0.0) + (1 - c) * k[i] * k[j];
  R[0][1] -= s * k[2];
  R[1][0] += s * k[2];
  R[0][2] += s * k[1];
  R[2][0] -= s * k[1];
  R[1][2] -= s * k[0];
  R[2][1] += s * k[0];
  const double t[3] = {0.3, -1.2, 2.5};
  for (const auto& name : gallery_names()) {
    auto base = gallery(name);
    const Expr* src[3] = {&base.x(), &base.y(), &base.z()};
    std::string comp[3];
    for (int i = 0; i < 3; ++i) {
      comp[i] = fmt17(t[i]);
      for (int j = 0; j < 3; ++j) comp[i] += " + " + fmt17(R[i][j]) + "*(" + src[j]->print() + ")";
    }
    auto moved = ParametricSurface::from_strings(comp[0], comp[1], comp[2], base.domain());
    for (double X : {0.2, 0.55, 0.8})
      for (double Y : {0.1, 0.6}) {
        auto f = forms_at(base, X, Y), g = forms_at(moved, X, Y);
        double tol = 1e-11 * (1 + std::abs(f.E) + std::abs(f.G));
        EXPECT_NEAR(f.E, g.E, tol) << name;
        EXPECT_NEAR(f.F, g.F, tol) << name;
        EXPECT_NEAR(f.G, g.G, tol) << name;
        EXPECT_NEAR(f.L, g.L, tol) << name;
        EXPECT_NEAR(f.M, g.M, tol) << name;
        EXPECT_NEAR(f.N, g.N, tol) << name;
      }
  }
}

TEST(Compatibility, TorusSatisfiesGaussCodazzi) {
  auto g = sample_forms(gallery("torus"), 41, 41);
  auto r = gauss_codazzi_residual(g);
  EXPECT_LE(r.max(), 1e-4);
}

TEST(Compatibility, PerturbedCurvatureIsDetected) {
  auto g = sample_forms(gallery("torus"), 41, 41);
  auto N = g.component(&FundamentalForms::N);
  for (auto& v : N.data) v += 0.1;
  auto r = gauss_codazzi_residual(g.component(&FundamentalForms::E), g.component(&FundamentalForms::G),
                                  g.component(&FundamentalForms::L), N, g.axes.u.spacing(), g.axes.v.spacing());
  EXPECT_GT(r.max(), 1e-2);
}

TEST(Compatibility, RotatingSurfacesConverge) {
  for (const char* name : {"ellipsoid", "cone", "catenoid"}) {
    auto r = gauss_codazzi_residual(sample_forms(gallery(name), 41, 41));
    EXPECT_LE(r.max(), 1e-3) << name;
  }
}

TEST(FormsGrid, CsvLayout) {
  auto g = sample_forms(gallery("cone"), 4, 3);
  std::ostringstream out;
  write_forms_csv(out, g);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "X,Y,E,F,G,L,M,N,Delta");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 12);
}

TEST(FormsGrid, ResolutionTooSmall) {
  try {
    sample_forms(gallery("plane"), 2, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
}
