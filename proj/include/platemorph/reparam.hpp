#pragma once

// Curvature-line reparametrization (X, Y) -> (S, T).
//
// Direction 1 curves are the level sets of T, direction 2 curves the level sets
// of S. Each family is traced as a graph over the parameter axis it is most
// aligned with, starting on a reference line through the seed; a curve's
// label is its offset from the seed along that line, so S(seed) = T(seed) = 0.
// Along every curve the derivatives with respect to the label are carried as
// variational equations, which gives X(S,T), Y(S,T) to second order by
// implicit differentiation at the curve intersections.

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "forms.hpp"
#include "growth.hpp"
#include "io.hpp"
#include "surface.hpp"

namespace platemorph {

namespace odeint = boost::numeric::odeint;

// Fundamental forms have no cross terms (up to tolerance).
inline bool needs_reparam(const FormsGrid& g, const FormTolerance& tol) {
  for (const auto& f : g.f.data)
    if (std::abs(f.F) > tol.f || std::abs(f.M) > tol.m) return true;
  return false;
}

// Coefficients of a cos^2 + b cos sin + c sin^2 = 0 for principal directions.
template <class S>
inline std::array<S, 3> direction_quadratic(const S& E, const S& F, const S& G, const S& L, const S& M, const S& N) {
  return {L * F - M * E, L * G - N * E, M * G - N * F};
}

inline double direction_residual(const FundamentalForms& f, double c, double s) {
  auto q = direction_quadratic(f.E, f.F, f.G, f.L, f.M, f.N);
  return q[0] * c * c + q[1] * c * s + q[2] * s * s;
}

struct DirectionPair {
  double c1 = 1, s1 = 0, c2 = 0, s2 = 1;
  bool umbilic = false;
};

namespace detail {

inline bool is_umbilic(const std::array<double, 3>& q, double E, double G, double L, double M, double N) {
  double scale = (std::abs(E) + std::abs(G)) * (std::abs(L) + std::abs(M) + std::abs(N));
  double big = std::max({std::abs(q[0]), std::abs(q[1]), std::abs(q[2])});
  return big <= 1e-9 * scale || scale == 0.0;
}

// Both unit roots of the homogeneous quadratic, via the symmetric form
// [[a, b/2], [b/2, c]]: with eigenpairs (mu1 <= 0 <= mu2),
// sqrt|mu2| e1 +- sqrt|mu1| e2 are its null directions.
inline std::array<std::array<double, 2>, 2> quadratic_roots(const std::array<double, 3>& q) {
  Eigen::Matrix2d Q;
  Q << q[0], 0.5 * q[1], 0.5 * q[1], q[2];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(Q);
  double mu1 = std::min(es.eigenvalues()(0), 0.0), mu2 = std::max(es.eigenvalues()(1), 0.0);
  Eigen::Vector2d e1 = es.eigenvectors().col(0), e2 = es.eigenvectors().col(1);
  Eigen::Vector2d a = std::sqrt(mu2) * e1 + std::sqrt(-mu1) * e2;
  Eigen::Vector2d b = std::sqrt(mu2) * e1 - std::sqrt(-mu1) * e2;
  a.normalize();
  b.normalize();
  return {{{a(0), a(1)}, {b(0), b(1)}}};
}

inline std::array<double, 2> oriented(std::array<double, 2> d, const std::array<double, 2>& ref) {
  if (d[0] * ref[0] + d[1] * ref[1] < 0.0) d = {-d[0], -d[1]};
  return d;
}

// d2 such that det(d1, d2) > 0.
inline DirectionPair make_pair(const std::array<double, 2>& d1, std::array<double, 2> d2, bool umbilic) {
  if (d1[0] * d2[1] - d1[1] * d2[0] < 0.0) d2 = {-d2[0], -d2[1]};
  return {d1[0], d1[1], d2[0], d2[1], umbilic};
}

}  // namespace detail

// Principal directions with direction 1 the root closest to +X (positive
// sin breaks a tie). Umbilic points return (0, pi/2) with the flag set.
inline DirectionPair principal_directions(const FundamentalForms& f) {
  auto q = direction_quadratic(f.E, f.F, f.G, f.L, f.M, f.N);
  if (detail::is_umbilic(q, f.E, f.G, f.L, f.M, f.N)) return {1, 0, 0, 1, true};
  auto r = detail::quadratic_roots(q);
  for (auto& d : r)
    if (d[0] < 0.0 || (d[0] == 0.0 && d[1] < 0.0)) d = {-d[0], -d[1]};
  int pick = 0;
  if (std::abs(r[0][0] - r[1][0]) <= 1e-12) pick = r[0][1] >= r[1][1] ? 0 : 1;
  else pick = r[0][0] > r[1][0] ? 0 : 1;
  return detail::make_pair(r[pick], r[1 - pick], false);
}

// Direction 1 closest (up to sign) to a given reference direction, with its
// sign matched to the reference.
inline DirectionPair principal_directions_near(const FundamentalForms& f, const std::array<double, 2>& ref) {
  auto q = direction_quadratic(f.E, f.F, f.G, f.L, f.M, f.N);
  if (detail::is_umbilic(q, f.E, f.G, f.L, f.M, f.N)) return {1, 0, 0, 1, true};
  auto r = detail::quadratic_roots(q);
  double a0 = std::abs(r[0][0] * ref[0] + r[0][1] * ref[1]), a1 = std::abs(r[1][0] * ref[0] + r[1][1] * ref[1]);
  int pick = a0 >= a1 ? 0 : 1;
  return detail::make_pair(detail::oriented(r[pick], ref), r[1 - pick], false);
}

struct DirectionField {
  ParamGrid axes;
  Grid2<DirectionPair> d;
  std::array<double, 2> seed{0.5, 0.5};
  DirectionPair at_seed;

  // Largest angle jump of direction 1 between grid neighbours.
  double max_jump() const {
    double worst = 0.0;
    auto ang = [](const DirectionPair& a, const DirectionPair& b) {
      return std::acos(std::clamp(a.c1 * b.c1 + a.s1 * b.s1, -1.0, 1.0));
    };
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i) {
        if (i + 1 < d.nx) worst = std::max(worst, ang(d(i, j), d(i + 1, j)));
        if (j + 1 < d.ny) worst = std::max(worst, ang(d(i, j), d(i, j + 1)));
      }
    return worst;
  }
  std::size_t umbilic_count() const {
    std::size_t n = 0;
    for (const auto& p : d.data) n += p.umbilic;
    return n;
  }
};

// Directions on the forms grid, labelled at the seed and carried to the rest
// of the grid by nearest-angle continuity (breadth first from the seed).
inline DirectionField direction_field(const FormsGrid& g, const FundamentalForms& seed_forms,
                                      std::array<double, 2> seed) {
  DirectionField out;
  out.axes = g.axes;
  out.seed = seed;
  out.at_seed = principal_directions(seed_forms);
  const int nx = g.nx(), ny = g.ny();
  out.d = Grid2<DirectionPair>(nx, ny);
  Grid2<unsigned char> done(nx, ny, 0);
  auto nearest = [](const Axis1& a, double t) {
    int i = static_cast<int>(std::lround((t - a.lo) / a.spacing()));
    return std::clamp(i, 0, a.n - 1);
  };
  int i0 = nearest(g.axes.u, seed[0]), j0 = nearest(g.axes.v, seed[1]);
  std::deque<std::pair<int, int>> queue;
  out.d(i0, j0) = principal_directions_near(g.f(i0, j0), {out.at_seed.c1, out.at_seed.s1});
  done(i0, j0) = 1;
  queue.push_back({i0, j0});
  const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    auto [i, j] = queue.front();
    queue.pop_front();
    const DirectionPair& p = out.d(i, j);
    for (int k = 0; k < 4; ++k) {
      int a = i + di[k], b = j + dj[k];
      if (a < 0 || b < 0 || a >= nx || b >= ny || done(a, b)) continue;
      out.d(a, b) = principal_directions_near(g.f(a, b), {p.c1, p.s1});
      done(a, b) = 1;
      queue.push_back({a, b});
    }
  }
  return out;
}

struct ReparamOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_slope = 1e3;
};

namespace detail {

using State1 = std::array<double, 1>;
using State3 = std::array<double, 3>;

// Slope of one principal family as a graph o = c(a) over the parameter axis
// `axis` (0: a = X, 1: a = Y).
class SlopeField {
 public:
  SlopeField(const ParametricSurface& s, int axis) : s_(&s), axis_(axis) {}

  int axis() const { return axis_; }
  std::pair<double, double> xy(double a, double o) const { return axis_ == 0 ? std::pair{a, o} : std::pair{o, a}; }

  double slope(double a, double o, double ref) const {
    auto [X, Y] = xy(a, o);
    auto f = coefficients_from_jets<double>(s_->jets(X, Y));
    return pick(quad(f), f, ref);
  }

  // Slope with partials in (a, o) up to second order.
  Jet2<double> slope_jet(double a, double o, double ref) const {
    auto [X, Y] = xy(a, o);
    auto f = coefficients_from_jets<Jet2<double>>(s_->jets2(X, Y));
    Jet2<double> m = pick(quad(f), f, ref);
    if (axis_ == 1) {
      std::swap(m.x, m.y);
      std::swap(m.xx, m.yy);
    }
    return m;
  }

 private:
  template <class T>
  std::array<T, 3> quad(const FormCoefficients<T>& f) const {
    auto q = direction_quadratic(f.E, f.F, f.G, f.L, f.M, f.N);
    // o' = m: along X, a + b m + c m^2 = 0; along Y, c + b m + a m^2 = 0
    if (axis_ == 1) std::swap(q[0], q[2]);
    return q;
  }

  template <class T>
  static T pick(const std::array<T, 3>& q, const FormCoefficients<T>& f, double ref) {
    using std::sqrt;
    std::array<double, 3> qv{value_of(q[0]), value_of(q[1]), value_of(q[2])};
    if (is_umbilic(qv, value_of(f.E), value_of(f.G), value_of(f.L), value_of(f.M), value_of(f.N)))
      throw Error(ErrorKind::Degenerate, "umbilic point on a curvature line");
    T disc = q[1] * q[1] - 4.0 * q[0] * q[2];
    if (!(value_of(disc) > 0.0)) throw Error(ErrorKind::Degenerate, "principal directions coincide");
    T root = sqrt(disc);
    T s = qv[1] >= 0.0 ? q[1] + root : q[1] - root;
    std::optional<T> best;
    double best_d = 0.0;
    auto consider = [&](const T& m) {
      double d = std::abs(value_of(m) - ref);
      if (!best || d < best_d) {
        best = m;
        best_d = d;
      }
    };
    if (value_of(s) != 0.0) consider(-2.0 * q[0] / s);
    if (qv[2] != 0.0) consider(-s / (2.0 * q[2]));
    if (!best) throw Error(ErrorKind::Degenerate, "no finite principal slope");
    return *best;
  }

  const ParametricSurface* s_;
  int axis_;
};

struct ValueSystem {
  const SlopeField* f;
  const double* ref;
  void operator()(const State1& x, State1& dx, double a) const { dx[0] = f->slope(a, x[0], *ref); }
};

// o, w = do/dlabel, v = d2o/dlabel2
struct VariationalSystem {
  const SlopeField* f;
  const double* ref;
  void operator()(const State3& x, State3& dx, double a) const {
    Jet2<double> m = f->slope_jet(a, x[0], *ref);
    dx[0] = m.v;
    dx[1] = m.y * x[1];
    dx[2] = m.yy * x[1] * x[1] + m.y * x[2];
  }
};

struct CurveNode {
  double a;
  State3 x;
  double m;
};

}  // namespace detail

// One traced curvature line o = c(a; label).
struct CurvatureLine {
  int axis = 0;
  double label = 0.0;
  std::vector<detail::CurveNode> nodes;  // ascending in a
  bool clipped_lo = false, clipped_hi = false;

  bool empty() const { return nodes.size() < 2; }
  double a_lo() const { return nodes.front().a; }
  double a_hi() const { return nodes.back().a; }
  bool covers(double a) const { return !empty() && a >= a_lo() && a <= a_hi(); }

  std::size_t nearest(double a) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), a, [](const detail::CurveNode& n, double t) { return n.a < t; });
    std::size_t k = static_cast<std::size_t>(it - nodes.begin());
    if (k == nodes.size()) return k - 1;
    if (k > 0 && a - nodes[k - 1].a < nodes[k].a - a) return k - 1;
    return k;
  }

  // Cubic Hermite through neighbouring nodes.
  double hermite(double a) const {
    auto it = std::upper_bound(nodes.begin(), nodes.end(), a, [](double t, const detail::CurveNode& n) { return t < n.a; });
    std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - nodes.begin()), 1, nodes.size() - 1) - 1;
    const auto &p = nodes[k], &q = nodes[k + 1];
    double h = q.a - p.a, t = (a - p.a) / h;
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * p.x[0] + (t3 - 2 * t2 + t) * h * p.m + (-2 * t3 + 3 * t2) * q.x[0] +
           (t3 - t2) * h * q.m;
  }
};

// Traces curvature lines of both families through a seed and maps points and
// labels between the two coordinate systems.
class CurvatureNet {
 public:
  CurvatureNet(ParametricSurface surface, const DirectionField& dirs, std::array<double, 2> seed, ReparamOptions opt = {})
      : s_(std::move(surface)), dirs_(dirs), seed_(seed), opt_(opt) {
    const Domain& d = s_.domain();
    if (!d.contains(seed[0], seed[1])) throw Error(ErrorKind::Domain, "seed lies outside the parameter domain");
    const DirectionPair& p = dirs.at_seed;
    if (p.umbilic) throw Error(ErrorKind::Degenerate, "seed is an umbilic point; choose another seed");
    const std::array<double, 2> d1{p.c1, p.s1}, d2{p.c2, p.s2};
    axis_[0] = std::abs(d1[0]) >= std::abs(d1[1]) ? 0 : 1;
    axis_[1] = std::abs(d2[0]) >= std::abs(d2[1]) ? 0 : 1;
    auto slope_of = [](const std::array<double, 2>& v, int axis) { return axis == 0 ? v[1] / v[0] : v[0] / v[1]; };
    ref_[0] = slope_of(d1, axis_[0]);
    ref_[1] = slope_of(d2, axis_[1]);
    // T grows along d2 and S along d1
    auto crossing = [&](const std::array<double, 2>& v, int axis, double m) {
      double va = v[axis], vo = v[1 - axis];
      return vo - m * va;
    };
    sign_[0] = crossing(d2, axis_[0], ref_[0]) >= 0.0 ? 1.0 : -1.0;
    sign_[1] = crossing(d1, axis_[1], ref_[1]) >= 0.0 ? 1.0 : -1.0;
    field_[0] = std::make_unique<detail::SlopeField>(s_, axis_[0]);
    field_[1] = std::make_unique<detail::SlopeField>(s_, axis_[1]);
    const double hx = dirs.axes.u.spacing(), hy = dirs.axes.v.spacing();
    max_dt_[0] = 0.5 * (axis_[0] == 0 ? hx : hy);
    max_dt_[1] = 0.5 * (axis_[1] == 0 ? hx : hy);
  }

  CurvatureNet(const CurvatureNet&) = delete;
  CurvatureNet& operator=(const CurvatureNet&) = delete;

  const ParametricSurface& surface() const { return s_; }
  std::array<double, 2> seed() const { return seed_; }
  int axis(int family) const { return axis_[family]; }
  double sign(int family) const { return sign_[family]; }

  // Family 0 lines are T = label, family 1 lines are S = label. The curve is
  // traced over [lo, hi] of its axis (clipped where tracing fails).
  CurvatureLine trace(int family, double label, double lo, double hi) const {
    const int ax = axis_[family];
    const double a0 = seed_[ax], o0 = seed_[1 - ax] + sign_[family] * label;
    CurvatureLine c;
    c.axis = ax;
    c.label = label;
    detail::State3 x0{o0, sign_[family], 0.0};
    double m0;
    try {
      m0 = field_[family]->slope(a0, o0, reference_slope(family, a0, o0));
    } catch (const Error&) {
      return c;
    }
    std::vector<detail::CurveNode> down, up;
    c.clipped_lo = !march(family, {a0, x0, m0}, lo, down);
    c.clipped_hi = !march(family, {a0, x0, m0}, hi, up);
    std::reverse(down.begin(), down.end());
    c.nodes = std::move(down);
    c.nodes.push_back({a0, x0, m0});
    c.nodes.insert(c.nodes.end(), up.begin(), up.end());
    return c;
  }

  // Curve value o at axis position a, integrated from the nearest node.
  std::optional<double> value_at(int family, const CurvatureLine& c, double a) const {
    if (!c.covers(a)) return std::nullopt;
    const auto& n = c.nodes[c.nearest(a)];
    if (a == n.a) return n.x[0];
    double ref = n.m;
    detail::ValueSystem sys{field_[family].get(), &ref};
    detail::State1 x{n.x[0]};
    odeint::runge_kutta_dopri5<detail::State1> st;
    try {
      st.do_step(sys, x, n.a, a - n.a);
    } catch (const Error&) {
      return std::nullopt;
    }
    return x[0];
  }

  // Full state (o, w, v) and slope jet at a.
  std::optional<std::pair<detail::State3, Jet2<double>>> state_at(int family, const CurvatureLine& c, double a) const {
    if (!c.covers(a)) return std::nullopt;
    const auto& n = c.nodes[c.nearest(a)];
    double ref = n.m;
    detail::VariationalSystem sys{field_[family].get(), &ref};
    detail::State3 x = n.x;
    try {
      if (a != n.a) {
        odeint::runge_kutta_dopri5<detail::State3> st;
        st.do_step(sys, x, n.a, a - n.a);
      }
      return std::pair{x, field_[family]->slope_jet(a, x[0], ref)};
    } catch (const Error&) {
      return std::nullopt;
    }
  }

  // Label of the curve of `family` passing through (X, Y), found by tracing
  // back to the reference line.
  std::optional<double> label_through(int family, double X, double Y) const {
    const int ax = axis_[family];
    const std::array<double, 2> p{X, Y};
    double a = p[ax], o = p[1 - ax];
    const double a0 = seed_[ax], o0 = seed_[1 - ax];
    if (a != a0) {
      double ref;
      try {
        ref = field_[family]->slope(a, o, reference_slope(family, a, o));
      } catch (const Error&) {
        return std::nullopt;
      }
      detail::ValueSystem sys{field_[family].get(), &ref};
      detail::State1 x{o};
      bool ok = integrate(sys, x, a, a0, max_dt_[family], [&](double t, const detail::State1& y) {
        ref = field_[family]->slope(t, y[0], ref);
        return std::abs(ref) <= opt_.max_slope;
      });
      if (!ok) return std::nullopt;
      o = x[0];
    }
    return sign_[family] * (o - o0);
  }

  // Intersection of a T-line (family 0) with an S-line (family 1) as jets of
  // X and Y in (S, T).
  struct Intersection {
    Jet2<double> X, Y;
  };

  std::optional<Intersection> intersect(const CurvatureLine& t_line, const CurvatureLine& s_line,
                                        std::optional<double> guess = {}) const {
    if (t_line.empty() || s_line.empty()) return std::nullopt;
    const int a1 = axis_[0], a2 = axis_[1];
    // g(a) = other2(P1(a)) - c2(axis2(P1(a)))
    auto g_of = [&](double a, double o1, auto&& c2) -> std::optional<double> {
      std::array<double, 2> P{0, 0};
      P[a1] = a;
      P[1 - a1] = o1;
      auto v = c2(P[a2]);
      if (!v) return std::nullopt;
      return P[1 - a2] - *v;
    };
    auto herm2 = [&](double b) -> std::optional<double> {
      if (!s_line.covers(b)) return std::nullopt;
      return s_line.hermite(b);
    };
    // bracket on curve-1 nodes using the interpolants
    std::optional<std::pair<double, double>> bracket;
    double best_dist = 0.0;
    const double centre = guess ? *guess : seed_[a1];
    std::optional<double> prev;
    double prev_a = 0.0;
    for (const auto& n : t_line.nodes) {
      auto g = g_of(n.a, n.x[0], herm2);
      if (g && prev && ((*g <= 0.0) != (*prev <= 0.0))) {
        double dist = std::min(std::abs(n.a - centre), std::abs(prev_a - centre));
        if (!bracket || dist < best_dist) {
          bracket = std::pair{prev_a, n.a};
          best_dist = dist;
        }
      }
      prev = g;
      prev_a = n.a;
    }
    if (!bracket) return std::nullopt;
    // bisection on the interpolants, then Newton on the exact curves
    double lo = bracket->first, hi = bracket->second;
    auto gh = [&](double a) { return g_of(a, t_line.hermite(a), herm2); };
    auto glo = gh(lo);
    if (!glo) return std::nullopt;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      auto gm = gh(mid);
      if (!gm) break;
      if ((*gm <= 0.0) == (*glo <= 0.0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    double a = 0.5 * (lo + hi);
    auto exact2 = [&](double b) { return value_at(1, s_line, b); };
    for (int it = 0; it < 20; ++it) {
      auto o1 = value_at(0, t_line, a);
      if (!o1) return std::nullopt;
      auto g = g_of(a, *o1, exact2);
      if (!g) return std::nullopt;
      std::array<double, 2> P{0, 0};
      P[a1] = a;
      P[1 - a1] = *o1;
      double m1 = field_[0]->slope(a, *o1, t_line.nodes[t_line.nearest(a)].m);
      double m2 = field_[1]->slope(P[a2], P[1 - a2] - *g, s_line.nodes[s_line.nearest(P[a2])].m);
      double dg = a1 == a2 ? m1 - m2 : 1.0 - m1 * m2;
      if (dg == 0.0) return std::nullopt;
      double step = *g / dg;
      a -= step;
      if (std::abs(step) <= 1e-15 * (1.0 + std::abs(a))) break;
    }
    return solve_jets(t_line, s_line, a);
  }

  double reference_slope(int family, double a, double o) const {
    // nearest direction-field node
    auto [X, Y] = field_[family]->xy(a, o);
    const Axis1 &u = dirs_.axes.u, &v = dirs_.axes.v;
    int i = std::clamp(static_cast<int>(std::lround((X - u.lo) / u.spacing())), 0, u.n - 1);
    int j = std::clamp(static_cast<int>(std::lround((Y - v.lo) / v.spacing())), 0, v.n - 1);
    const DirectionPair& p = dirs_.d(i, j);
    std::array<double, 2> d = family == 0 ? std::array{p.c1, p.s1} : std::array{p.c2, p.s2};
    const int ax = axis_[family];
    if (d[ax] == 0.0) return ref_[family];
    return d[1 - ax] / d[ax];
  }

 private:
  // Adaptive integration of x(a) from a_start to a_end; on_step(a, x) is
  // called after every accepted step and may stop the run by returning false.
  // The stepper runs forward in tau = |a - a_start| since its step limit only
  // works for increasing time.
  template <class System, class State, class OnStep>
  bool integrate(const System& sys, State& x, double a_start, double a_end, double max_dt, OnStep on_step) const {
    const double dir = a_end >= a_start ? 1.0 : -1.0, length = std::abs(a_end - a_start);
    auto forward = [&](const State& y, State& dy, double tau) {
      sys(y, dy, a_start + dir * tau);
      for (auto& v : dy) v *= dir;
    };
    auto stepper = odeint::make_controlled(opt_.abs_tol, opt_.rel_tol, max_dt, odeint::runge_kutta_dopri5<State>());
    double tau = 0.0, dt = max_dt;
    int fails = 0;
    while (length - tau > 1e-15 * (1.0 + length)) {
      dt = std::min(dt, length - tau);
      try {
        if (stepper.try_step(forward, x, tau, dt) == odeint::success) {
          fails = 0;
          double a = length - tau <= 1e-15 * (1.0 + length) ? a_end : a_start + dir * tau;
          if (!on_step(a, x)) return false;
        } else if (++fails > 200) {
          return false;
        }
      } catch (const Error&) {
        return false;
      }
    }
    return true;
  }

  // Integrate from `start` towards `end`; false if the curve stops early.
  bool march(int family, detail::CurveNode start, double end, std::vector<detail::CurveNode>& out) const {
    double ref = start.m;
    detail::VariationalSystem sys{field_[family].get(), &ref};
    detail::State3 x = start.x;
    return integrate(sys, x, start.a, end, max_dt_[family], [&](double a, const detail::State3& y) {
      ref = field_[family]->slope(a, y[0], ref);
      if (std::abs(ref) > opt_.max_slope) return false;
      out.push_back({a, y, ref});
      return true;
    });
  }

  std::optional<Intersection> solve_jets(const CurvatureLine& t_line, const CurvatureLine& s_line, double a) const {
    auto st1 = state_at(0, t_line, a);
    if (!st1) return std::nullopt;
    std::array<double, 2> P{0, 0};
    P[axis_[0]] = a;
    P[1 - axis_[0]] = st1->first[0];
    auto st2 = state_at(1, s_line, P[axis_[1]]);
    if (!st2) return std::nullopt;
    // Phi_f(X, Y, S, T) = o - c_f(a; label); variables ordered (X, Y, S, T)
    Eigen::Matrix<double, 2, 4> grad;
    std::array<Eigen::Matrix4d, 2> hess;
    auto fill = [&](int f, const detail::State3& x, const Jet2<double>& m, int label) {
      const int ia = axis_[f], io = 1 - axis_[f];
      const double w = x[1], v = x[2];
      grad.row(f).setZero();
      grad(f, ia) = -m.v;
      grad(f, io) = 1.0;
      grad(f, label) = -w;
      Eigen::Matrix4d H = Eigen::Matrix4d::Zero();
      H(ia, ia) = -(m.x + m.y * m.v);
      H(ia, label) = H(label, ia) = -m.y * w;
      H(label, label) = -v;
      hess[f] = H;
    };
    fill(0, st1->first, st1->second, 3);
    fill(1, st2->first, st2->second, 2);
    Eigen::Matrix2d J = grad.leftCols<2>();
    Eigen::Matrix2d B = grad.rightCols<2>();
    if (std::abs(J.determinant()) < 1e-14) throw Error(ErrorKind::Degenerate, "curvature lines meet tangentially");
    Eigen::Matrix2d Jinv = J.inverse();
    Eigen::Matrix2d dx = -Jinv * B;  // d(X,Y)/d(S,T)
    std::array<Eigen::Vector4d, 2> dz;
    for (int q = 0; q < 2; ++q) dz[q] << dx(0, q), dx(1, q), q == 0 ? 1.0 : 0.0, q == 1 ? 1.0 : 0.0;
    auto second = [&](int q, int r) {
      Eigen::Vector2d rhs(dz[q].dot(hess[0] * dz[r]), dz[q].dot(hess[1] * dz[r]));
      return Eigen::Vector2d(-Jinv * rhs);
    };
    Eigen::Vector2d ss = second(0, 0), st = second(0, 1), tt = second(1, 1);
    Intersection out;
    out.X = Jet2<double>(P[0], dx(0, 0), dx(0, 1), ss(0), st(0), tt(0));
    out.Y = Jet2<double>(P[1], dx(1, 0), dx(1, 1), ss(1), st(1), tt(1));
    return out;
  }

  ParametricSurface s_;
  DirectionField dirs_;
  std::array<double, 2> seed_;
  ReparamOptions opt_;
  std::array<int, 2> axis_{};
  std::array<double, 2> ref_{}, sign_{}, max_dt_{};
  std::array<std::unique_ptr<detail::SlopeField>, 2> field_;
};

struct InversePoint {
  bool found = false;   // both curves reached and intersected
  bool inside = false;  // intersection lies in the parameter domain
  Jet2<double> X, Y;
  double jacobian() const { return X.x * Y.y - X.y * Y.x; }
};

struct ReparamMap {
  ParamGrid omega;  // (X, Y) grid
  Grid2<double> S, T;
  Grid2<unsigned char> forward_valid;

  ParamGrid star;  // bounding rectangle of the image, (S, T)
  Grid2<InversePoint> inverse;
  std::vector<std::array<double, 2>> boundary;  // image of the domain boundary, counter-clockwise in (X, Y)

  std::shared_ptr<const CurvatureNet> net;

  Grid2<unsigned char> star_valid() const {
    return inverse.map([](const InversePoint& p) -> unsigned char { return p.found && p.inside; });
  }
  double min_jacobian() const {
    double m = 1e300;
    for (const auto& p : inverse.data)
      if (p.found && p.inside) m = std::min(m, p.jacobian());
    return m;
  }
};

// Inverse samples on an arbitrary (S, T) lattice.
inline Grid2<InversePoint> sample_inverse(const CurvatureNet& net, const Axis1& s_axis, const Axis1& t_axis,
                                          const Domain& dom) {
  auto range = [&](int family) {
    int ax = net.axis(family);
    double lo = ax == 0 ? dom.x_lo : dom.y_lo, hi = ax == 0 ? dom.x_hi : dom.y_hi;
    double pad = 0.05 * (hi - lo);
    return std::pair{lo - pad, hi + pad};
  };
  auto [lo0, hi0] = range(0);
  auto [lo1, hi1] = range(1);
  std::vector<CurvatureLine> t_lines, s_lines;
  for (int j = 0; j < t_axis.n; ++j) t_lines.push_back(net.trace(0, t_axis.at(j), lo0, hi0));
  for (int i = 0; i < s_axis.n; ++i) s_lines.push_back(net.trace(1, s_axis.at(i), lo1, hi1));
  Grid2<InversePoint> out(s_axis.n, t_axis.n);
  for (int j = 0; j < t_axis.n; ++j) {
    std::optional<double> guess;
    for (int i = 0; i < s_axis.n; ++i) {
      auto hit = net.intersect(t_lines[j], s_lines[i], guess);
      InversePoint& p = out(i, j);
      if (!hit) continue;
      p.found = true;
      p.X = hit->X;
      p.Y = hit->Y;
      p.inside = dom.contains(p.X.v, p.Y.v, 1e-12 * dom.size());
      guess = net.axis(0) == 0 ? p.X.v : p.Y.v;
    }
  }
  return out;
}

inline ReparamMap build_reparam(const ParametricSurface& surface, const FormsGrid& forms, const DirectionField& dirs,
                                std::array<double, 2> seed, ReparamOptions opt = {}) {
  ReparamMap map;
  map.net = std::make_shared<CurvatureNet>(surface, dirs, seed, opt);
  const CurvatureNet& net = *map.net;
  map.omega = forms.axes;
  const int nx = forms.nx(), ny = forms.ny();
  map.S = Grid2<double>(nx, ny, 0.0);
  map.T = Grid2<double>(nx, ny, 0.0);
  map.forward_valid = Grid2<unsigned char>(nx, ny, 0);
  double slo = 1e300, shi = -1e300, tlo = 1e300, thi = -1e300;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double X = forms.axes.u.at(i), Y = forms.axes.v.at(j);
      auto t = net.label_through(0, X, Y);
      auto s = net.label_through(1, X, Y);
      if (!t || !s) continue;
      map.S(i, j) = *s;
      map.T(i, j) = *t;
      map.forward_valid(i, j) = 1;
      slo = std::min(slo, *s);
      shi = std::max(shi, *s);
      tlo = std::min(tlo, *t);
      thi = std::max(thi, *t);
    }
  if (!(slo < shi) || !(tlo < thi)) throw Error(ErrorKind::Degenerate, "curvature-line map collapsed");
  // domain boundary walked counter-clockwise
  auto push = [&](int i, int j) {
    if (map.forward_valid(i, j)) map.boundary.push_back({map.S(i, j), map.T(i, j)});
  };
  for (int i = 0; i < nx - 1; ++i) push(i, 0);
  for (int j = 0; j < ny - 1; ++j) push(nx - 1, j);
  for (int i = nx - 1; i > 0; --i) push(i, ny - 1);
  for (int j = ny - 1; j > 0; --j) push(0, j);

  map.star = {{slo, shi, nx}, {tlo, thi, ny}};
  map.inverse = sample_inverse(net, map.star.u, map.star.v, surface.domain());
  return map;
}

// Largest axis-aligned block of valid nodes, as inclusive index ranges
// {i0, i1, j0, j1}.
inline std::array<int, 4> largest_valid_block(const Grid2<unsigned char>& valid) {
  const int nx = valid.nx, ny = valid.ny;
  std::vector<int> height(nx, 0);
  std::array<int, 4> best{0, -1, 0, -1};
  long best_area = 0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) height[i] = valid(i, j) ? height[i] + 1 : 0;
    std::vector<int> stack;
    for (int i = 0; i <= nx; ++i) {
      int h = i < nx ? height[i] : 0;
      while (!stack.empty() && height[stack.back()] >= h) {
        int top = stack.back();
        stack.pop_back();
        int left = stack.empty() ? 0 : stack.back() + 1;
        long area = static_cast<long>(height[top]) * (i - left);
        if (height[top] > 0 && area > best_area) {
          best_area = area;
          best = {left, i - 1, j - height[top] + 1, j};
        }
      }
      stack.push_back(i);
    }
  }
  if (best_area == 0) throw Error(ErrorKind::Degenerate, "reparametrized domain has no valid nodes");
  return best;
}

// Sampled r*(S, T) with jets in (S, T).
struct PulledBack {
  ParamGrid axes;
  Grid2<Vec3<Jet2<double>>> jets;
  Grid2<unsigned char> valid;  // empty when every node is valid
  Grid2<double> X, Y;

  bool is_valid(int i, int j) const { return valid.data.empty() || valid(i, j); }
};

inline PulledBack pullback_samples(const ParametricSurface& surface, const ParamGrid& axes,
                                   const Grid2<InversePoint>& inv, bool masked) {
  PulledBack out;
  out.axes = axes;
  out.jets = Grid2<Vec3<Jet2<double>>>(inv.nx, inv.ny);
  out.X = Grid2<double>(inv.nx, inv.ny, 0.0);
  out.Y = Grid2<double>(inv.nx, inv.ny, 0.0);
  if (masked) out.valid = Grid2<unsigned char>(inv.nx, inv.ny, 0);
  for (int j = 0; j < inv.ny; ++j)
    for (int i = 0; i < inv.nx; ++i) {
      const InversePoint& p = inv(i, j);
      if (!(p.found && p.inside)) {
        if (!masked) throw Error(ErrorKind::Degenerate, "inverse map undefined inside the sampled rectangle");
        continue;
      }
      out.jets(i, j) = surface.eval(p.X, p.Y);
      out.X(i, j) = p.X.v;
      out.Y(i, j) = p.Y.v;
      if (masked) out.valid(i, j) = 1;
    }
  return out;
}

// r* on the bounding rectangle, masked outside the image of the domain.
inline PulledBack pullback_surface(const ParametricSurface& surface, const ReparamMap& map) {
  return pullback_samples(surface, map.star, map.inverse, true);
}

// r* resampled on an nx x ny grid over the largest rectangle inside the image.
inline PulledBack pullback_rectangle(const ParametricSurface& surface, const ReparamMap& map, int nx, int ny) {
  require_resolution(nx, ny);
  auto b = largest_valid_block(map.star_valid());
  const Axis1 &su = map.star.u, &sv = map.star.v;
  double s0 = su.at(b[0]), s1 = su.at(b[1]), t0 = sv.at(b[2]), t1 = sv.at(b[3]);
  const double ds = 0.5 * su.spacing(), dt = 0.5 * sv.spacing();
  for (int attempt = 0; attempt < 12; ++attempt) {
    if (!(s0 < s1) || !(t0 < t1)) break;
    Axis1 a{s0, s1, nx}, c{t0, t1, ny};
    auto inv = sample_inverse(*map.net, a, c, surface.domain());
    bool bad_lo_s = false, bad_hi_s = false, bad_lo_t = false, bad_hi_t = false, bad = false;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const auto& p = inv(i, j);
        if (p.found && p.inside) continue;
        bad = true;
        (i < nx / 2 ? bad_lo_s : bad_hi_s) = true;
        (j < ny / 2 ? bad_lo_t : bad_hi_t) = true;
      }
    if (!bad) return pullback_samples(surface, {a, c}, inv, false);
    if (bad_lo_s) s0 += ds;
    if (bad_hi_s) s1 -= ds;
    if (bad_lo_t) t0 += dt;
    if (bad_hi_t) t1 -= dt;
  }
  throw Error(ErrorKind::Degenerate, "could not fit a rectangle inside the reparametrized domain");
}

inline FormsGrid forms_of(const PulledBack& p, double diag) {
  FormsGrid g;
  g.axes = p.axes;
  g.f = Grid2<FundamentalForms>(p.jets.nx, p.jets.ny);
  for (int j = 0; j < p.jets.ny; ++j)
    for (int i = 0; i < p.jets.nx; ++i)
      if (p.is_valid(i, j)) g.f(i, j) = forms_from_jets(p.jets(i, j), diag);
  return g;
}

// Largest |F*| / sqrt(E* G*) and |M*| / max(|L*|, |N*|, sqrt(E* G*) / diag).
inline std::pair<double, double> cross_terms(const PulledBack& p, double diag) {
  double f = 0.0, m = 0.0;
  auto g = forms_of(p, diag);
  for (int j = 0; j < p.jets.ny; ++j)
    for (int i = 0; i < p.jets.nx; ++i) {
      if (!p.is_valid(i, j)) continue;
      const auto& q = g.f(i, j);
      double w = std::sqrt(q.E * q.G);
      f = std::max(f, std::abs(q.F) / w);
      m = std::max(m, std::abs(q.M) / std::max({std::abs(q.L), std::abs(q.N), w / diag}));
    }
  return {f, m};
}

inline void write_forward_csv(std::ostream& out, const ReparamMap& m) {
  out << "X,Y,S,T\n";
  for (int j = 0; j < m.S.ny; ++j)
    for (int i = 0; i < m.S.nx; ++i)
      if (m.forward_valid(i, j)) write_csv_row(out, {m.omega.u.at(i), m.omega.v.at(j), m.S(i, j), m.T(i, j)});
}

inline void write_inverse_csv(std::ostream& out, const ReparamMap& m) {
  out << "S,T,X,Y,valid\n";
  for (int j = 0; j < m.inverse.ny; ++j)
    for (int i = 0; i < m.inverse.nx; ++i) {
      const auto& p = m.inverse(i, j);
      bool ok = p.found && p.inside;
      double nan = std::nan("");
      write_csv_row(out, {m.star.u.at(i), m.star.v.at(j), p.found ? p.X.v : nan, p.found ? p.Y.v : nan, ok ? 1.0 : 0.0});
    }
}

}  // namespace platemorph
