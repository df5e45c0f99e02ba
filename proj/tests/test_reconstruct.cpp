#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "platemorph/gallery.hpp"
#include "platemorph/reconstruct.hpp"

using namespace platemorph;
constexpr double pi = std::numbers::pi;

namespace {

struct Case {
  FormsGrid forms;
  GrowthField growth;
  Grid2<Vec3d> target;
};

Case make_case(const std::string& name, int n) {
  auto s = gallery(name);
  Case c;
  c.forms = sample_forms(s, n, n);
  c.growth = synthesize(c.forms, 0.01, FormTolerance::for_scale(s.diagonal()));
  c.target = c.forms.f.map([](const FundamentalForms& f) { return f.r; });
  return c;
}

GrowthField uniform_growth(int n, double l1, double l2, double k1, double k2) {
  GrowthField g;
  g.axes = {{0, 1, n}, {0, 1, n}};
  g.l1_0 = Grid2<double>(n, n, l1);
  g.l2_0 = Grid2<double>(n, n, l2);
  g.l1_1 = Grid2<double>(n, n, k1);
  g.l2_1 = Grid2<double>(n, n, k2);
  return g;
}

Vec3d rotate_z(const Vec3d& p, double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  return {c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]};
}

}  // namespace

TEST(Reconstruct, ConeGrowthInvertsToConeForms) {
  const double X = 0.5;
  GrowthField g = uniform_growth(3, std::sqrt(2.0), 2 * pi * X, 0.0, std::sqrt(2.0) * pi);
  auto f = forms_from_growth(g);
  EXPECT_NEAR(f.E(1, 1), 2.0, 1e-15);
  EXPECT_NEAR(f.G(1, 1), pi * pi, 1e-13);
  EXPECT_EQ(f.L(1, 1), 0.0);
  EXPECT_NEAR(f.N(1, 1), -std::sqrt(2.0) * pi * pi, 1e-13);
  auto direct = forms_at(gallery("cone"), X, 0.3);
  EXPECT_NEAR(direct.E, f.E(1, 1), 1e-12);
  EXPECT_NEAR(direct.G, f.G(1, 1), 1e-12);
  EXPECT_NEAR(direct.L, f.L(1, 1), 1e-12);
  EXPECT_NEAR(direct.N, f.N(1, 1), 1e-12);
}

TEST(Reconstruct, UnitGrowthGivesPlane) {
  GrowthField g = uniform_growth(11, 1.0, 1.0, 0.0, 0.0);
  auto f = forms_from_growth(g);
  for (int k = 0; k < 121; ++k) {
    EXPECT_EQ(f.E.data[k], 1.0);
    EXPECT_EQ(f.G.data[k], 1.0);
    EXPECT_EQ(f.L.data[k], 0.0);
    EXPECT_EQ(f.N.data[k], 0.0);
  }
  auto fi = integrate_frame(f);
  for (int j = 0; j < 11; ++j)
    for (int i = 0; i < 11; ++i) {
      const Vec3d& r = fi.frames(i, j).r;
      EXPECT_NEAR(r[0], g.axes.u.at(i), 1e-13);
      EXPECT_NEAR(r[1], g.axes.v.at(j), 1e-13);
      EXPECT_EQ(r[2], 0.0);
    }
}

// surface -> forms -> growth -> forms is an algebraic identity.
TEST(Reconstruct, GrowthRoundTripReproducesForms) {
  for (const char* name : {"torus", "cone", "catenoid", "ellipsoid", "plane"}) {
    auto c = make_case(name, 41);
    auto f = forms_from_growth(c.growth);
    for (int j = 0; j < 41; ++j)
      for (int i = 0; i < 41; ++i) {
        const auto& o = c.forms.f(i, j);
        double scale = std::max({1.0, std::abs(o.E), std::abs(o.G)});
        double bend = std::max({1.0, std::abs(o.L), std::abs(o.N)});
        EXPECT_NEAR(f.E(i, j), o.E, 1e-10 * scale) << name;
        EXPECT_NEAR(f.G(i, j), o.G, 1e-10 * scale) << name;
        EXPECT_NEAR(f.L(i, j), o.L, 1e-10 * bend) << name;
        EXPECT_NEAR(f.N(i, j), o.N, 1e-10 * bend) << name;
      }
  }
}

TEST(Reconstruct, PlaneFormsGiveFlatGrid) {
  auto c = make_case("plane", 21);
  auto rep = reconstruct(c.growth, c.target);
  EXPECT_LE(rep.max_dev, 1e-13);
  auto fi = integrate_frame(forms_from_growth(c.growth));
  for (const auto& s : fi.frames.data) EXPECT_EQ(s.r[2], 0.0);
}

TEST(Reconstruct, TorusAndCatenoidAt101) {
  for (const char* name : {"torus", "catenoid"}) {
    auto c = make_case(name, 101);
    auto rep = reconstruct(c.growth, c.target);
    EXPECT_LE(rep.max_dev, 1e-4) << name;
    EXPECT_LE(rep.mean_dev, rep.max_dev) << name;
    EXPECT_NEAR(rep.transform.R.determinant(), 1.0, 1e-12) << name;
    EXPECT_LE((rep.transform.R.transpose() * rep.transform.R - Eigen::Matrix3d::Identity()).norm(), 1e-12) << name;
    for (double d : rep.deviation.data) EXPECT_GE(d, 0.0);
  }
}

// Frame invariants stay within 1e-6 per unit parameter length (each march
// covers at most two unit-length lines).
TEST(Reconstruct, FrameInvariantsHold) {
  for (const char* name : {"torus", "catenoid", "cone", "plane"}) {
    auto c = make_case(name, 101);
    auto fi = integrate_frame(forms_from_growth(c.growth));
    EXPECT_LE(fi.metric_error, 2e-6) << name;
  }
}

TEST(Reconstruct, SeedFrameIsCanonical) {
  auto c = make_case("torus", 21);
  auto f = forms_from_growth(c.growth);
  auto fi = integrate_frame(f, 1.0);
  const FrameState& s = fi.frames(0, 0);
  auto same = [](const Vec3d& a, const Vec3d& b) { return a[0] == b[0] && a[1] == b[1] && a[2] == b[2]; };
  EXPECT_TRUE(same(s.r, Vec3d(0, 0, 0)));
  EXPECT_TRUE(same(s.a, Vec3d(std::sqrt(f.E(0, 0)), 0, 0)));
  EXPECT_TRUE(same(s.b, Vec3d(0, std::sqrt(f.G(0, 0)), 0)));
  EXPECT_TRUE(same(s.n, Vec3d(0, 0, 1)));
}

TEST(Reconstruct, AlignmentOfIdenticalGrids) {
  auto c = make_case("catenoid", 11);
  auto rep = align_and_score(c.target, c.target);
  EXPECT_LE(rep.max_dev, 1e-15);
  EXPECT_LE((rep.transform.R - Eigen::Matrix3d::Identity()).norm(), 1e-12);
  EXPECT_LE(rep.transform.t.norm(), 1e-12 * rep.diag);
  EXPECT_FALSE(rep.transform.ambiguous);
}

TEST(Reconstruct, AlignmentUndoesRigidMotion) {
  auto c = make_case("torus", 21);
  auto moved = c.target.map([](const Vec3d& p) { return rotate_z(p, pi / 6) + Vec3d(0.3, -1.2, 2.0); });
  auto rep = align_and_score(moved, c.target);
  EXPECT_LE(rep.max_dev, 1e-14);
  EXPECT_NEAR(rep.transform.R.determinant(), 1.0, 1e-12);
  EXPECT_NEAR(std::atan2(rep.transform.R(1, 0), rep.transform.R(0, 0)), -pi / 6, 1e-12);
}

TEST(Reconstruct, AlignmentExcludesReflection) {
  auto c = make_case("catenoid", 21);
  auto mirrored = c.target.map([](const Vec3d& p) { return Vec3d(p[0], p[1], -p[2]); });
  auto rep = align_and_score(mirrored, c.target);
  EXPECT_NEAR(rep.transform.R.determinant(), 1.0, 1e-12);
  EXPECT_GT(rep.max_dev, 1e-2);
}

TEST(Reconstruct, CollinearPointsAreFlaggedAmbiguous) {
  std::vector<Vec3d> line;
  for (int k = 0; k < 10; ++k) line.push_back({0.1 * k, 0.2 * k, 0.0});
  auto t = kabsch(line, line);
  EXPECT_TRUE(t.ambiguous);
  for (const auto& p : line) EXPECT_LE(norm(t.apply(p) - p), 1e-12);
}

TEST(Reconstruct, IncompatibleFormsAreRejected) {
  auto c = make_case("torus", 101);
  auto f = forms_from_growth(c.growth);
  auto bent = f;
  for (auto& n : bent.N.data) n += 0.1;
  auto r = gauss_codazzi_residual(bent.E, bent.G, bent.L, bent.N, f.axes.u.spacing(), f.axes.v.spacing());
  EXPECT_GT(r.max(), 1e-2);
  try {
    integrate_frame(bent);
    FAIL() << "expected a compatibility error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Tolerance);
  }
  EXPECT_NO_THROW(integrate_frame(f));
}

TEST(Reconstruct, MaskedOrOrderZeroGrowthIsRejected) {
  auto c = make_case("torus", 11);
  auto masked = c.growth;
  masked.valid = Grid2<unsigned char>(11, 11, 1);
  masked.valid(3, 4) = 0;
  EXPECT_THROW(forms_from_growth(masked), Error);
  auto flat = c.growth;
  flat.order0_only = true;
  EXPECT_THROW(forms_from_growth(flat), Error);
  auto negative = c.growth;
  negative.l1_0(2, 2) = -1.0;
  try {
    forms_from_growth(negative);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Degenerate);
  }
}

// Errors at 26, 51 and 101 nodes per side; below the floor counts as converged.
TEST(Reconstruct, ErrorConvergesAtSecondOrder) {
  for (const char* name : {"torus", "catenoid", "cone"}) {
    std::vector<double> err;
    for (int n : {26, 51, 101}) {
      auto c = make_case(name, n);
      err.push_back(reconstruct(c.growth, c.target, n == 101 ? 1e-4 : 1e9).max_dev);
    }
    const double floor = 1e-11;
    EXPECT_GE(observed_order(err[0], err[1], floor), 2.0) << name << ' ' << err[0] << ' ' << err[1];
    EXPECT_GE(observed_order(err[1], err[2], floor), 2.0) << name << ' ' << err[1] << ' ' << err[2];
  }
}

TEST(Reconstruct, ObservedOrder) {
  EXPECT_NEAR(observed_order(4e-6, 1e-6, 1e-12), 2.0, 1e-12);
  EXPECT_EQ(observed_order(1e-6, 1e-13, 1e-12), INFINITY);
}

TEST(Reconstruct, ExportLayout) {
  auto c = make_case("torus", 6);
  auto rep = reconstruct(c.growth, c.target, 1e9);
  std::ostringstream csv, vtk;
  write_reconstruction_csv(csv, rep);
  write_reconstruction_vtk(vtk, rep);
  std::string s = csv.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "X,Y,x,y,z,deviation");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 36);
  EXPECT_EQ(vtk.str().rfind("# vtk DataFile Version 3.0\n", 0), 0u);
  EXPECT_NE(vtk.str().find("SCALARS deviation double"), std::string::npos);
}
