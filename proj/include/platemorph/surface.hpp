#pragma once

// Parametric surfaces r(X, Y) over a rectangle.
//
// Surface file format (see keyvalue.hpp for the line syntax):
//
//   name   = torus                      optional
//   x      = 0.5*(cos(2*pi*X)+2)*cos(2*pi*Y)
//   y      = -0.5*(cos(2*pi*X)+2)*sin(2*pi*Y)
//   z      = 0.5*sin(2*pi*X)
//   domain = 0 1 0 1                    X_lo X_hi Y_lo Y_hi, optional
//
// The domain defaults to the unit square.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "expr.hpp"
#include "keyvalue.hpp"
#include "vec3.hpp"

namespace platemorph {

struct Domain {
  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;

  bool contains(double X, double Y, double slack = 0.0) const {
    return X >= x_lo - slack && X <= x_hi + slack && Y >= y_lo - slack && Y <= y_hi + slack;
  }
  double width() const { return x_hi - x_lo; }
  double height() const { return y_hi - y_lo; }
  double size() const { return std::max(width(), height()); }
};

inline Domain parse_domain(const std::string& text) {
  std::istringstream in(text);
  Domain d;
  if (!(in >> d.x_lo >> d.x_hi >> d.y_lo >> d.y_hi))
    throw Error(ErrorKind::Parse, "domain needs four numbers: X_lo X_hi Y_lo Y_hi");
  std::string extra;
  if (in >> extra) throw Error(ErrorKind::Parse, "trailing text in domain: " + extra);
  if (!(d.x_lo < d.x_hi) || !(d.y_lo < d.y_hi)) throw Error(ErrorKind::Config, "domain bounds must satisfy lo < hi");
  return d;
}

class ParametricSurface {
 public:
  ParametricSurface() = default;
  ParametricSurface(Expr x, Expr y, Expr z, Domain dom = {}, std::string name = "")
      : x_(std::move(x)), y_(std::move(y)), z_(std::move(z)), dom_(dom), name_(std::move(name)) {}

  static ParametricSurface from_strings(const std::string& x, const std::string& y, const std::string& z,
                                        Domain dom = {}, std::string name = "") {
    return ParametricSurface(parse_component(x, "x"), parse_component(y, "y"), parse_component(z, "z"), dom,
                             std::move(name));
  }

  static ParametricSurface from_key_values(const KeyValues& kv) {
    for (const char* k : {"x", "y", "z"})
      if (!kv.count(k)) throw Error(ErrorKind::Parse, std::string("surface file is missing key '") + k + "'");
    Domain d;
    if (auto it = kv.find("domain"); it != kv.end()) d = parse_domain(it->second);
    std::string name = kv.count("name") ? kv.at("name") : "custom";
    return from_strings(kv.at("x"), kv.at("y"), kv.at("z"), d, name);
  }

  static ParametricSurface load(const std::string& path) {
    return from_key_values(parse_key_values(read_text_file(path)));
  }

  std::string to_text() const {
    std::ostringstream out;
    out.precision(17);
    out << "name = " << name_ << "\n";
    out << "x = " << x_.print() << "\n";
    out << "y = " << y_.print() << "\n";
    out << "z = " << z_.print() << "\n";
    out << "domain = " << dom_.x_lo << ' ' << dom_.x_hi << ' ' << dom_.y_lo << ' ' << dom_.y_hi << "\n";
    return out.str();
  }

  template <class T>
  Vec3<T> eval(const T& X, const T& Y) const {
    return Vec3<T>(x_.eval(X, Y), y_.eval(X, Y), z_.eval(X, Y));
  }

  Vec3d position(double X, double Y) const { return eval(X, Y); }

  Vec3<Jet2<double>> jets(double X, double Y) const {
    return eval(Jet2<double>::var_x(X), Jet2<double>::var_y(Y));
  }

  // Jets of jets: partials up to fourth order, used where derivatives of the
  // fundamental forms are needed.
  Vec3<Jet2<Jet2<double>>> jets2(double X, double Y) const {
    using J = Jet2<double>;
    Jet2<J> x(J::var_x(X), J(1.0), J(0.0), J(0.0), J(0.0), J(0.0));
    Jet2<J> y(J::var_y(Y), J(0.0), J(1.0), J(0.0), J(0.0), J(0.0));
    return eval(x, y);
  }

  const Expr& x() const { return x_; }
  const Expr& y() const { return y_; }
  const Expr& z() const { return z_; }
  const Domain& domain() const { return dom_; }
  const std::string& name() const { return name_; }
  void set_domain(const Domain& d) { dom_ = d; }
  void set_name(std::string n) { name_ = std::move(n); }

  // Diagonal of the bounding box of a 21x21 sample; the length scale for
  // tolerances.
  double diagonal() const {
    if (diag_ > 0.0) return diag_;
    Vec3d lo(1e300, 1e300, 1e300), hi(-1e300, -1e300, -1e300);
    for (int j = 0; j <= 20; ++j)
      for (int i = 0; i <= 20; ++i) {
        double X = dom_.x_lo + dom_.width() * i / 20.0, Y = dom_.y_lo + dom_.height() * j / 20.0;
        Vec3d p;
        try {
          p = position(X, Y);
        } catch (const Error&) {
          continue;
        }
        for (int k = 0; k < 3; ++k) {
          lo[k] = std::min(lo[k], p[k]);
          hi[k] = std::max(hi[k], p[k]);
        }
      }
    diag_ = hi[0] >= lo[0] ? norm(hi - lo) : 0.0;
    if (!(diag_ > 0.0)) throw Error(ErrorKind::Degenerate, "surface has zero extent");
    return diag_;
  }

 private:
  Expr x_, y_, z_;
  Domain dom_;
  std::string name_;
  mutable double diag_ = 0.0;

  static Expr parse_component(const std::string& s, const char* which) {
    try {
      return Expr::parse(s);
    } catch (const ParseError& e) {
      throw ParseError(e.offset(), std::string("in ") + which + " expression: " + e.message());
    }
  }
};

}  // namespace platemorph
