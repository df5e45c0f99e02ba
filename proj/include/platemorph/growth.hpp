#pragma once

// Growth functions lambda_i = lambda_i^(0) + lambda_i^(1) Z for a stress-free
// plate whose bottom face becomes a given surface.

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <utility>

#include "forms.hpp"
#include "io.hpp"

namespace platemorph {

// Thresholds below which F and M count as zero.
struct FormTolerance {
  double f = 1e-9, m = 1e-9;

  static FormTolerance for_scale(double diag, double factor = 1e-9) { return {factor * diag * diag, factor * diag}; }
};

struct Order0 {
  double l1, l2;
};
struct Order1 {
  double l1, l2;
};

// General-F in-plane growth. Only order 0 is available for F != 0.
inline Order0 growth_order0_general(const FundamentalForms& f) {
  double det = f.E * f.G - f.F * f.F;
  if (!(det > 0.0) || !(f.E > 0.0) || !(f.G > 0.0)) throw Error(ErrorKind::Singular, "non-regular point (EG - F^2 <= 0)");
  double d6 = std::pow(det, 1.0 / 6.0);
  return {std::cbrt(f.E) * d6 / std::pow(f.G, 1.0 / 6.0), std::cbrt(f.G) * d6 / std::pow(f.E, 1.0 / 6.0)};
}

inline Order0 growth_order0_orthogonal(const FundamentalForms& f, const FormTolerance& tol) {
  if (std::abs(f.F) > tol.f)
    throw Error(ErrorKind::Tolerance, "F = " + fmt17(f.F) + " exceeds tolerance; reparametrize first");
  if (!(f.E > 0.0) || !(f.G > 0.0)) throw Error(ErrorKind::Singular, "non-regular point (E or G not positive)");
  return {std::sqrt(f.E), std::sqrt(f.G)};
}

inline Order1 growth_order1(const FundamentalForms& f, const Order0& l0, const FormTolerance& tol) {
  if (std::abs(f.F) > tol.f)
    throw Error(ErrorKind::Tolerance, "F = " + fmt17(f.F) + " exceeds tolerance; reparametrize first");
  if (std::abs(f.M) > tol.m)
    throw Error(ErrorKind::Tolerance, "M = " + fmt17(f.M) + " exceeds tolerance; reparametrize first");
  return {-f.L / l0.l1, -f.N / l0.l2};
}

struct GrowthField {
  ParamGrid axes;
  std::string u_name = "X", v_name = "Y";
  Grid2<double> l1_0, l2_0, l1_1, l2_1;
  Grid2<unsigned char> valid;  // empty when every node is valid
  double h = 0.01;
  bool order0_only = false;  // general-F synthesis: l1_1, l2_1 are not defined

  int nx() const { return l1_0.nx; }
  int ny() const { return l1_0.ny; }
  bool is_valid(int i, int j) const { return valid.data.empty() || valid(i, j); }
  std::size_t valid_count() const {
    if (valid.data.empty()) return l1_0.data.size();
    std::size_t c = 0;
    for (auto v : valid.data) c += v ? 1 : 0;
    return c;
  }
  double lambda1(int i, int j, double Z) const { return l1_0(i, j) + l1_1(i, j) * Z; }
  double lambda2(int i, int j, double Z) const { return l2_0(i, j) + l2_1(i, j) * Z; }
};

struct PositivityViolation {
  int i, j;
  double Z;
  double value;
};

// Growth is linear in Z, so checking both faces covers [0, h].
inline std::optional<PositivityViolation> check_positivity(const GrowthField& g) {
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (!g.is_valid(i, j)) continue;
      for (double Z : {0.0, g.h}) {
        double a = g.lambda1(i, j, Z), b = g.lambda2(i, j, Z);
        if (!(a > 0.0)) return PositivityViolation{i, j, Z, a};
        if (!(b > 0.0)) return PositivityViolation{i, j, Z, b};
      }
    }
  return std::nullopt;
}

// Builds the field and rejects non-positive through-thickness growth.
inline GrowthField assemble_field(ParamGrid axes, Grid2<double> l1_0, Grid2<double> l2_0, Grid2<double> l1_1,
                                  Grid2<double> l2_1, double h, Grid2<unsigned char> valid = {}) {
  if (!(h > 0.0)) throw Error(ErrorKind::Config, "thickness must be positive");
  if (l1_0.nx != l2_0.nx || l1_0.nx != l1_1.nx || l1_0.nx != l2_1.nx || l1_0.ny != l2_0.ny ||
      l1_0.ny != l1_1.ny || l1_0.ny != l2_1.ny)
    throw Error(ErrorKind::Config, "growth grids are not congruent");
  GrowthField g;
  g.axes = axes;
  g.l1_0 = std::move(l1_0);
  g.l2_0 = std::move(l2_0);
  g.l1_1 = std::move(l1_1);
  g.l2_1 = std::move(l2_1);
  g.valid = std::move(valid);
  g.h = h;
  if (auto bad = check_positivity(g)) {
    throw Error(ErrorKind::Degenerate, "non-positive growth " + fmt17(bad->value) + " at (" +
                                           fmt17(axes.u.at(bad->i)) + ", " + fmt17(axes.v.at(bad->j)) +
                                           "), Z = " + fmt17(bad->Z));
  }
  return g;
}

// Orthogonal curvature-net synthesis over a forms grid.
inline GrowthField synthesize(const FormsGrid& forms, double h, const FormTolerance& tol,
                              Grid2<unsigned char> valid = {}) {
  const int nx = forms.nx(), ny = forms.ny();
  Grid2<double> a(nx, ny), b(nx, ny), c(nx, ny), d(nx, ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (!valid.data.empty() && !valid(i, j)) continue;
      const auto& f = forms.f(i, j);
      Order0 l0 = growth_order0_orthogonal(f, tol);
      Order1 l1 = growth_order1(f, l0, tol);
      a(i, j) = l0.l1;
      b(i, j) = l0.l2;
      c(i, j) = l1.l1;
      d(i, j) = l1.l2;
    }
  return assemble_field(forms.axes, std::move(a), std::move(b), std::move(c), std::move(d), h, std::move(valid));
}

// Order-0 synthesis from the general-F formulas; lambda^(1) grids stay zero.
inline GrowthField synthesize_order0_general(const FormsGrid& forms, double h) {
  const int nx = forms.nx(), ny = forms.ny();
  Grid2<double> a(nx, ny), b(nx, ny), z(nx, ny, 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Order0 l0 = growth_order0_general(forms.f(i, j));
      a(i, j) = l0.l1;
      b(i, j) = l0.l2;
    }
  GrowthField g = assemble_field(forms.axes, std::move(a), std::move(b), z, z, h);
  g.order0_only = true;
  return g;
}

// Rows for valid nodes only, first parameter fastest.
inline void write_growth_csv(std::ostream& out, const GrowthField& g) {
  out << g.u_name << ',' << g.v_name << ",l1_0,l2_0,l1_1,l2_1\n";
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (!g.is_valid(i, j)) continue;
      write_csv_row(out, {g.axes.u.at(i), g.axes.v.at(j), g.l1_0(i, j), g.l2_0(i, j), g.l1_1(i, j), g.l2_1(i, j)});
    }
}

// Reference-plane points (u, v, 0) carrying the four fields; masked fields
// get an extra `valid` array and zeros at invalid nodes.
inline void write_growth_vtk(std::ostream& out, const GrowthField& g) {
  Grid2<Vec3d> pts(g.nx(), g.ny());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) pts(i, j) = Vec3d(g.axes.u.at(i), g.axes.v.at(j), 0.0);
  auto masked = [&](const Grid2<double>& src) {
    Grid2<double> out = src;
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i)
        if (!g.is_valid(i, j)) out(i, j) = 0.0;
    return out;
  };
  Grid2<double> a = masked(g.l1_0), b = masked(g.l2_0), c = masked(g.l1_1), d = masked(g.l2_1);
  std::vector<PointArray> arrays{{"l1_0", &a}, {"l2_0", &b}, {"l1_1", &c}, {"l2_1", &d}};
  Grid2<double> v;
  if (!g.valid.data.empty()) {
    v = g.valid.map([](unsigned char c) { return c ? 1.0 : 0.0; });
    arrays.push_back({"valid", &v});
  }
  write_vtk_structured(out, "growth field", pts, arrays);
}

}  // namespace platemorph
