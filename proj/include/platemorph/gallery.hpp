#pragma once

// Built-in target surfaces and the closed-form growth known for them.
//
// The torus and catenoid are mirrored in y relative to their textbook form so
// that r_X x r_Y is the outward normal; the shapes are the same and the growth
// functions keep the signs of the closed forms below.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "surface.hpp"

namespace platemorph {

inline const std::vector<std::string>& gallery_names() {
  static const std::vector<std::string> names{"plane", "ellipsoid", "cone", "catenoid", "torus", "helicoid"};
  return names;
}

inline ParametricSurface gallery(const std::string& name) {
  const double cut = 1e-3;
  if (name == "plane") return ParametricSurface::from_strings("X", "Y", "0", {0, 1, 0, 1}, name);
  if (name == "ellipsoid")
    return ParametricSurface::from_strings("sin(pi*X)*cos(2*pi*Y)", "sin(pi*X)*sin(2*pi*Y)", "2*cos(pi*X)",
                                           {cut, 1 - cut, 0, 1}, name);
  if (name == "cone")
    return ParametricSurface::from_strings("X*sin(2*pi*Y)", "X*cos(2*pi*Y)", "X", {cut, 1, 0, 1}, name);
  if (name == "catenoid")
    return ParametricSurface::from_strings("-2*cosh(pi*X - pi/2)*cos(2*pi*Y)", "2*cosh(pi*X - pi/2)*sin(2*pi*Y)",
                                           "pi*(2*X - 1)", {0, 1, 0, 1}, name);
  if (name == "torus")
    return ParametricSurface::from_strings("0.5*(cos(2*pi*X) + 2)*cos(2*pi*Y)", "-0.5*(cos(2*pi*X) + 2)*sin(2*pi*Y)",
                                           "0.5*sin(2*pi*X)", {0, 1, 0, 1}, name);
  if (name == "helicoid")
    return ParametricSurface::from_strings("X*sin(4*pi*Y)", "X*cos(4*pi*Y)", "2*Y", {0, 1, 0, 1}, name);
  std::string list;
  for (auto& n : gallery_names()) list += (list.empty() ? "" : ", ") + n;
  throw Error(ErrorKind::Config, "unknown gallery surface '" + name + "' (available: " + list + ")");
}

// lambda_1, lambda_2 at a parameter point and height Z.
struct GoldenGrowth {
  std::function<double(double, double, double)> lambda1, lambda2;
};

// Closed-form growth for the rotating surfaces, in terms of X and Z.
inline std::optional<GoldenGrowth> golden_growth(const std::string& name) {
  using std::cos;
  using std::cosh;
  using std::sin;
  using std::sqrt;
  constexpr double pi = std::numbers::pi;
  const double r2 = std::sqrt(2.0);
  if (name == "ellipsoid")
    return GoldenGrowth{
        [=](double X, double, double Z) {
          double q = 5 - 3 * cos(2 * pi * X);
          return pi / r2 * sqrt(q) + 4 * pi * Z / q;
        },
        [=](double X, double, double Z) {
          double q = 5 - 3 * cos(2 * pi * X);
          return 2 * pi * sin(pi * X) + 4 * r2 * pi * sin(pi * X) * Z / sqrt(q);
        }};
  if (name == "cone")
    return GoldenGrowth{[=](double, double, double) { return r2; },
                        [=](double X, double, double Z) { return 2 * pi * X + r2 * pi * Z; }};
  if (name == "catenoid")
    return GoldenGrowth{
        [=](double X, double, double Z) {
          return r2 * pi * sqrt(cosh(pi - 2 * pi * X) + 1) - pi * Z / cosh(pi / 2 - pi * X);
        },
        [=](double X, double, double Z) {
          return 2 * r2 * pi * sqrt(cosh(pi - 2 * pi * X) + 1) + 2 * pi * Z / cosh(pi / 2 - pi * X);
        }};
  if (name == "torus")
    return GoldenGrowth{[=](double, double, double Z) { return pi + 2 * pi * Z; },
                        [=](double X, double, double Z) {
                          return pi * (2 + cos(2 * pi * X)) + 2 * pi * cos(2 * pi * X) * Z;
                        }};
  return std::nullopt;
}

// Helicoid growth in the curvature-line coordinates S = asinh(2 pi X)/(4 pi) + Y,
// T = -asinh(2 pi X)/(4 pi) + Y.
inline GoldenGrowth helicoid_golden() {
  constexpr double pi = std::numbers::pi;
  auto base = [](double u) { return std::sqrt(1 + std::cosh(4 * pi * u)); };
  auto bend = [](double u) {
    double s = 1 / std::cosh(2 * pi * u);
    return 2 * pi * std::sqrt((1 + std::cosh(4 * pi * u)) * s * s * s * s);
  };
  return {[=](double S, double T, double Z) { return base(S - T) - bend(S - T) * Z; },
          [=](double S, double T, double Z) { return base(S - T) + bend(S - T) * Z; }};
}

inline double helicoid_S(double X, double Y) { return std::asinh(2 * std::numbers::pi * X) / (4 * std::numbers::pi) + Y; }
inline double helicoid_T(double X, double Y) { return -std::asinh(2 * std::numbers::pi * X) / (4 * std::numbers::pi) + Y; }

}  // namespace platemorph
