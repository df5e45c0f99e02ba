#pragma once

// Rebuild a surface from growth fields: growth -> orthogonal fundamental forms
// -> Gauss-Weingarten frame integration -> rigid alignment with a target.

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "finite_difference.hpp"
#include "forms.hpp"
#include "growth.hpp"
#include "io.hpp"

namespace platemorph {

// E, G, L, N on a grid with F = M = 0.
struct OrthogonalForms {
  ParamGrid axes;
  Grid2<double> E, G, L, N;

  int nx() const { return E.nx; }
  int ny() const { return E.ny; }
};

inline OrthogonalForms forms_from_growth(const GrowthField& g) {
  if (g.valid_count() != g.l1_0.data.size())
    throw Error(ErrorKind::Config, "reconstruction needs a growth field without masked nodes");
  if (g.order0_only) throw Error(ErrorKind::Config, "reconstruction needs order-1 growth");
  OrthogonalForms f;
  f.axes = g.axes;
  const int nx = g.nx(), ny = g.ny();
  f.E = f.G = f.L = f.N = Grid2<double>(nx, ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double a = g.l1_0(i, j), b = g.l2_0(i, j);
      if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorKind::Degenerate, "non-positive in-plane growth");
      f.E(i, j) = a * a;
      f.G(i, j) = b * b;
      f.L(i, j) = -a * g.l1_1(i, j);
      f.N(i, j) = -b * g.l2_1(i, j);
    }
  return f;
}

inline OrthogonalForms orthogonal_part(const FormsGrid& g) {
  return {g.axes, g.component(&FundamentalForms::E), g.component(&FundamentalForms::G),
          g.component(&FundamentalForms::L), g.component(&FundamentalForms::N)};
}

struct FrameState {
  Vec3d r, a, b, n;  // position, r_u, r_v, unit normal
};

namespace detail {

// The coefficient samples needed along one grid line, indexed by node.
struct LineSamples {
  std::vector<double> E, Eu, Ev, G, Gu, Gv, L, N;
  explicit LineSamples(int n) : E(n), Eu(n), Ev(n), G(n), Gu(n), Gv(n), L(n), N(n) {}
};

struct PointCoeffs {
  double E, Eu, Ev, G, Gu, Gv, L, N;
};

inline PointCoeffs coeffs_at(const LineSamples& s, double lo, double h, double t) {
  auto w = lagrange_weights(static_cast<int>(s.E.size()), lo, h, t);
  return {w.apply(s.E), w.apply(s.Eu), w.apply(s.Ev), w.apply(s.G), w.apply(s.Gu), w.apply(s.Gv), w.apply(s.L), w.apply(s.N)};
}

using Frame12 = std::array<Vec3d, 4>;

// Gauss-Weingarten derivative of (r, a, b, n) along u (dir 0) or v (dir 1).
inline Frame12 frame_rate(const Frame12& x, const PointCoeffs& c, int dir) {
  const Vec3d &a = x[1], &b = x[2], &n = x[3];
  if (dir == 0) {
    return {a, a * (c.Eu / (2 * c.E)) - b * (c.Ev / (2 * c.G)) + n * c.L, a * (c.Ev / (2 * c.E)) + b * (c.Gu / (2 * c.G)),
            a * (-c.L / c.E)};
  }
  return {b, a * (c.Ev / (2 * c.E)) + b * (c.Gu / (2 * c.G)), a * (-c.Gu / (2 * c.E)) + b * (c.Gv / (2 * c.G)) + n * c.N,
          b * (-c.N / c.G)};
}

inline double rate_bound(const PointCoeffs& c) {
  return (std::abs(c.Eu) + std::abs(c.Ev)) / c.E + (std::abs(c.Gu) + std::abs(c.Gv)) / c.G +
         std::abs(c.L) / std::sqrt(c.E) + std::abs(c.N) / std::sqrt(c.G) +
         std::abs(c.Ev) / std::sqrt(c.E * c.G) + std::abs(c.Gu) / std::sqrt(c.E * c.G);
}

inline Frame12 axpy(const Frame12& x, const Frame12& k, double s) {
  return {x[0] + k[0] * s, x[1] + k[1] * s, x[2] + k[2] * s, x[3] + k[3] * s};
}

// Classical RK4 along one grid line; the node-to-node step is split into
// substeps where the coefficients change quickly. The substep count does not
// depend on the spacing, so the scheme keeps its order under refinement.
inline std::vector<Frame12> march_line(const LineSamples& s, double lo, double h, Frame12 x0, int dir) {
  const int n = static_cast<int>(s.E.size());
  std::vector<Frame12> out(n);
  out[0] = x0;
  Frame12 x = x0;
  for (int k = 0; k + 1 < n; ++k) {
    double t0 = lo + k * h;
    double rate = std::max(rate_bound(coeffs_at(s, lo, h, t0)), rate_bound(coeffs_at(s, lo, h, t0 + h)));
    int sub = std::clamp(static_cast<int>(std::ceil(rate)), 1, 4000);
    double dt = h / sub;
    for (int m = 0; m < sub; ++m) {
      double t = t0 + m * dt;
      auto f = [&](double tt, const Frame12& y) { return frame_rate(y, coeffs_at(s, lo, h, tt), dir); };
      Frame12 k1 = f(t, x);
      Frame12 k2 = f(t + 0.5 * dt, axpy(x, k1, 0.5 * dt));
      Frame12 k3 = f(t + 0.5 * dt, axpy(x, k2, 0.5 * dt));
      Frame12 k4 = f(t + dt, axpy(x, k3, dt));
      for (int q = 0; q < 4; ++q) x[q] += (k1[q] + k2[q] * 2.0 + k3[q] * 2.0 + k4[q]) * (dt / 6.0);
    }
    out[k + 1] = x;
  }
  return out;
}

}  // namespace detail

struct FrameIntegration {
  Grid2<FrameState> frames;
  double drift = 0.0;          // largest |r| gap between u-first and v-first marching
  double metric_error = 0.0;   // worst relative violation of the frame invariants
  CompatibilityResidual compatibility;
};

inline Grid2<FrameState> march_frames(const OrthogonalForms& f, bool u_first) {
  const int nx = f.nx(), ny = f.ny();
  const double hu = f.axes.u.spacing(), hv = f.axes.v.spacing();
  GridDiff D(nx, ny, hu, hv);
  auto row = [&](int j) {
    detail::LineSamples s(nx);
    for (int i = 0; i < nx; ++i) {
      s.E[i] = f.E(i, j);
      s.G[i] = f.G(i, j);
      s.L[i] = f.L(i, j);
      s.N[i] = f.N(i, j);
      s.Eu[i] = D.dx(f.E, i, j);
      s.Ev[i] = D.dy(f.E, i, j);
      s.Gu[i] = D.dx(f.G, i, j);
      s.Gv[i] = D.dy(f.G, i, j);
    }
    return s;
  };
  auto col = [&](int i) {
    detail::LineSamples s(ny);
    for (int j = 0; j < ny; ++j) {
      s.E[j] = f.E(i, j);
      s.G[j] = f.G(i, j);
      s.L[j] = f.L(i, j);
      s.N[j] = f.N(i, j);
      s.Eu[j] = D.dx(f.E, i, j);
      s.Ev[j] = D.dy(f.E, i, j);
      s.Gu[j] = D.dx(f.G, i, j);
      s.Gv[j] = D.dy(f.G, i, j);
    }
    return s;
  };
  detail::Frame12 seed{Vec3d(0, 0, 0), Vec3d(std::sqrt(f.E(0, 0)), 0, 0), Vec3d(0, std::sqrt(f.G(0, 0)), 0),
                       Vec3d(0, 0, 1)};
  Grid2<FrameState> out(nx, ny);
  auto store = [&](int i, int j, const detail::Frame12& x) { out(i, j) = {x[0], x[1], x[2], x[3]}; };
  if (u_first) {
    auto first = detail::march_line(row(0), f.axes.u.lo, hu, seed, 0);
    for (int i = 0; i < nx; ++i) {
      auto line = detail::march_line(col(i), f.axes.v.lo, hv, first[i], 1);
      for (int j = 0; j < ny; ++j) store(i, j, line[j]);
    }
  } else {
    auto first = detail::march_line(col(0), f.axes.v.lo, hv, seed, 1);
    for (int j = 0; j < ny; ++j) {
      auto line = detail::march_line(row(j), f.axes.u.lo, hu, first[j], 0);
      for (int i = 0; i < nx; ++i) store(i, j, line[i]);
    }
  }
  return out;
}

// Frames marched along u then v, with the v-first march as a cross-check.
// Throws Tolerance when the forms fail the compatibility pre-check or the
// frame invariants drift beyond max_metric.
inline FrameIntegration integrate_frame(const OrthogonalForms& f, double max_compat = 1e-4, double max_metric = 1e-4) {
  require_resolution(f.nx(), f.ny());
  FrameIntegration r;
  r.compatibility = gauss_codazzi_residual(f.E, f.G, f.L, f.N, f.axes.u.spacing(), f.axes.v.spacing());
  if (r.compatibility.max() > max_compat)
    throw Error(ErrorKind::Tolerance, "forms are not compatible: Gauss-Codazzi residual " +
                                          fmt17(r.compatibility.max()) + " exceeds " + fmt17(max_compat));
  r.frames = march_frames(f, true);
  auto other = march_frames(f, false);
  for (int j = 0; j < f.ny(); ++j)
    for (int i = 0; i < f.nx(); ++i) {
      const FrameState& s = r.frames(i, j);
      r.drift = std::max(r.drift, norm(s.r - other(i, j).r));
      double e = f.E(i, j), g = f.G(i, j);
      double w = std::sqrt(e * g);
      r.metric_error = std::max({r.metric_error, std::abs(dot(s.a, s.a) - e) / e, std::abs(dot(s.b, s.b) - g) / g,
                                 std::abs(dot(s.a, s.b)) / w, std::abs(dot(s.n, s.n) - 1.0),
                                 std::abs(dot(s.a, s.n)) / std::sqrt(e), std::abs(dot(s.b, s.n)) / std::sqrt(g)});
    }
  if (r.metric_error > max_metric)
    throw Error(ErrorKind::Tolerance, "frame drift " + fmt17(r.metric_error) + " exceeds " + fmt17(max_metric));
  return r;
}

struct RigidTransform {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  bool ambiguous = false;  // covariance rank < 3

  Vec3d apply(const Vec3d& p) const {
    Eigen::Vector3d q = R * Eigen::Vector3d(p[0], p[1], p[2]) + t;
    return {q(0), q(1), q(2)};
  }
};

// Least-squares rotation and translation taking `moving` onto `target`.
inline RigidTransform kabsch(const std::vector<Vec3d>& moving, const std::vector<Vec3d>& target) {
  if (moving.size() != target.size() || moving.empty()) throw Error(ErrorKind::Config, "alignment needs congruent point sets");
  const double n = static_cast<double>(moving.size());
  Eigen::Vector3d cm = Eigen::Vector3d::Zero(), ct = Eigen::Vector3d::Zero();
  for (std::size_t k = 0; k < moving.size(); ++k) {
    cm += Eigen::Vector3d(moving[k][0], moving[k][1], moving[k][2]);
    ct += Eigen::Vector3d(target[k][0], target[k][1], target[k][2]);
  }
  cm /= n;
  ct /= n;
  Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
  for (std::size_t k = 0; k < moving.size(); ++k) {
    Eigen::Vector3d p = Eigen::Vector3d(moving[k][0], moving[k][1], moving[k][2]) - cm;
    Eigen::Vector3d q = Eigen::Vector3d(target[k][0], target[k][1], target[k][2]) - ct;
    H += p * q.transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d V = svd.matrixV(), U = svd.matrixU();
  Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
  D(2, 2) = (V * U.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  RigidTransform T;
  T.R = V * D * U.transpose();
  T.t = ct - T.R * cm;
  const double smax = svd.singularValues().maxCoeff(), smin = svd.singularValues().minCoeff();
  T.ambiguous = smin <= 1e-12 * std::max(smax, 1e-300);
  return T;
}

inline double bounding_diagonal(const std::vector<Vec3d>& pts) {
  Vec3d lo(1e300, 1e300, 1e300), hi(-1e300, -1e300, -1e300);
  for (const auto& p : pts)
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  return norm(hi - lo);
}

struct ReconstructionReport {
  ParamGrid axes;
  Grid2<Vec3d> points;  // reconstructed, after alignment
  Grid2<double> deviation;
  RigidTransform transform;
  double diag = 0.0;
  double max_dev = 0.0, mean_dev = 0.0;  // fractions of diag
  double drift = 0.0;                    // fraction of diag
  double metric_error = 0.0;
  CompatibilityResidual compatibility;
};

inline ReconstructionReport align_and_score(const Grid2<Vec3d>& recon, const Grid2<Vec3d>& target) {
  if (recon.nx != target.nx || recon.ny != target.ny) throw Error(ErrorKind::Config, "grids are not congruent");
  ReconstructionReport rep;
  rep.transform = kabsch(recon.data, target.data);
  rep.diag = bounding_diagonal(target.data);
  if (!(rep.diag > 0.0)) throw Error(ErrorKind::Degenerate, "target has zero extent");
  rep.points = recon.map([&](const Vec3d& p) { return rep.transform.apply(p); });
  rep.deviation = Grid2<double>(recon.nx, recon.ny);
  double sum = 0.0;
  for (std::size_t k = 0; k < recon.data.size(); ++k) {
    double d = norm(rep.points.data[k] - target.data[k]);
    rep.deviation.data[k] = d;
    rep.max_dev = std::max(rep.max_dev, d);
    sum += d;
  }
  rep.max_dev /= rep.diag;
  rep.mean_dev = sum / static_cast<double>(recon.data.size()) / rep.diag;
  return rep;
}

inline ReconstructionReport reconstruct(const GrowthField& g, const Grid2<Vec3d>& target, double max_compat = 1e-4) {
  auto forms = forms_from_growth(g);
  auto fi = integrate_frame(forms, max_compat);
  auto rep = align_and_score(fi.frames.map([](const FrameState& s) { return s.r; }), target);
  rep.axes = g.axes;
  rep.drift = fi.drift / rep.diag;
  rep.metric_error = fi.metric_error;
  rep.compatibility = fi.compatibility;
  return rep;
}

// Observed order from errors on grids refined by a factor 2. Errors at or
// below `floor` count as converged and yield +infinity.
inline double observed_order(double coarse, double fine, double floor) {
  if (fine <= floor) return INFINITY;
  if (!(coarse > 0.0)) return 0.0;
  return std::log2(coarse / fine);
}

inline void write_reconstruction_csv(std::ostream& out, const ReconstructionReport& r, const std::string& u = "X",
                                     const std::string& v = "Y") {
  out << u << ',' << v << ",x,y,z,deviation\n";
  for (int j = 0; j < r.points.ny; ++j)
    for (int i = 0; i < r.points.nx; ++i) {
      const Vec3d& p = r.points(i, j);
      write_csv_row(out, {r.axes.u.at(i), r.axes.v.at(j), p[0], p[1], p[2], r.deviation(i, j)});
    }
}

inline void write_reconstruction_vtk(std::ostream& out, const ReconstructionReport& r) {
  write_vtk_structured(out, "reconstructed surface", r.points, {{"deviation", &r.deviation}});
}

}  // namespace platemorph
