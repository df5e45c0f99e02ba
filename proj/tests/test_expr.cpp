#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "platemorph/expr.hpp"
#include "random_expr.hpp"

using namespace platemorph;
constexpr double pi = std::numbers::pi;

TEST(Parse, EllipsoidComponent) {
  Expr e = parse("sin(pi*X)*cos(2*pi*Y)");
  ASSERT_EQ(e.root()->op, Op::Mul);
  EXPECT_EQ(e.root()->a->op, Op::Call);
  EXPECT_EQ(e.root()->a->fn, Func::Sin);
  EXPECT_EQ(e.root()->b->fn, Func::Cos);
  EXPECT_DOUBLE_EQ(e(0.5, 0.0), 1.0);
  EXPECT_NEAR(e(0.3, 0.2), std::sin(0.3 * pi) * std::cos(0.4 * pi), 1e-15);
}

TEST(Parse, SingleVariable) {
  Expr e = parse("X");
  EXPECT_EQ(e.root()->op, Op::X);
  EXPECT_EQ(e(0.75, 2.0), 0.75);
}

TEST(Parse, CatenoidRadius) {
  Expr e = parse("2*cosh(pi*X - pi/2)");
  Expr expected = parse("(2 * cosh(((pi * X) - (pi / 2))))");
  EXPECT_EQ(e, expected);
  EXPECT_NEAR(e(0.5, 0.0), 2.0, 1e-15);
}

TEST(Parse, PrecedenceAndAssociativity) {
  EXPECT_DOUBLE_EQ(parse("2^3^2")(0, 0), 512.0);
  EXPECT_DOUBLE_EQ(parse("-2^2")(0, 0), -4.0);
  EXPECT_DOUBLE_EQ(parse("1 - 2 - 3")(0, 0), -4.0);
  EXPECT_DOUBLE_EQ(parse("8/4/2")(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(parse("2*X^2")(3, 0), 18.0);
  EXPECT_DOUBLE_EQ(parse("X^-1")(4, 0), 0.25);
  EXPECT_DOUBLE_EQ(parse("1.5e1 + .5")(0, 0), 15.5);
}

TEST(Parse, Errors) {
  try {
    parse("sin(X) + foo");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 9u);
    EXPECT_NE(std::string(e.what()).find("unknown identifier"), std::string::npos);
  }
  try {
    parse("X^Y");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 2u);
  }
  try {
    parse("(X + 1");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 6u);
  }
  EXPECT_THROW(parse("X $ Y"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("sin X"), ParseError);
  EXPECT_THROW(parse("x"), ParseError);
  EXPECT_NO_THROW(parse("2^(1/3)"));
}

TEST(Parse, PrintParseIdempotent) {
  testing_support::RandomExpr gen(7);
  for (int k = 0; k < 300; ++k) {
    Expr a = parse(gen(4));
    Expr b = parse(a.print());
    EXPECT_EQ(a, b) << a.print();
    EXPECT_EQ(b.print(), a.print());
  }
  Expr c = parse("0.1*X + 1e-300 - 3.0000000000000004");
  EXPECT_EQ(parse(c.print()), c);
}

TEST(Jet, Bilinear) {
  Jet2<double> j = parse("X*Y").jet(2, 3);
  EXPECT_EQ(j.v, 6);
  EXPECT_EQ(j.x, 3);
  EXPECT_EQ(j.y, 2);
  EXPECT_EQ(j.xy, 1);
  EXPECT_EQ(j.xx, 0);
  EXPECT_EQ(j.yy, 0);
}

TEST(Jet, SineAtExtremum) {
  Jet2<double> j = parse("sin(pi*X)").jet(0.5, 0);
  EXPECT_DOUBLE_EQ(j.v, 1.0);
  EXPECT_NEAR(j.x, 0.0, 1e-15);
  EXPECT_NEAR(j.xx, -pi * pi, 1e-13);
}

TEST(Jet, CoshAgainstCentralDifference) {
  Expr e = parse("cosh(pi*X - pi/2)");
  const double h = 1e-5, X = 0.25, Y = 0.0;
  Jet2<double> j = e.jet(X, Y);
  double fd = (e(X + h, Y) - e(X - h, Y)) / (2 * h);
  EXPECT_NEAR(j.x, fd, 1e-8 * std::abs(fd));
  EXPECT_NEAR(j.xx, pi * pi * std::cosh(pi * X - pi / 2), 1e-12);
}

TEST(Jet, DomainErrors) {
  EXPECT_THROW(parse("ln(X)").jet(0, 0), Error);
  EXPECT_THROW(parse("1/(X - 1)").jet(1, 0), Error);
  EXPECT_THROW(parse("sqrt(X)")(-1, 0), Error);
  try {
    parse("abs(X - 0.5)").jet(0.5, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonDifferentiable);
  }
  Jet2<double> a = parse("abs(X - 0.5)").jet(0.25, 0);
  EXPECT_EQ(a.x, -1.0);
  EXPECT_DOUBLE_EQ(parse("abs(X)")(0, 0), 0.0);
}

TEST(Jet, SechPrimitive) {
  Jet2<double> j = parse("sech(X)").jet(0.3, 0);
  double s = 1 / std::cosh(0.3), t = std::tanh(0.3);
  EXPECT_NEAR(j.v, s, 1e-15);
  EXPECT_NEAR(j.x, -s * t, 1e-15);
  EXPECT_NEAR(j.xx, s * (t * t - s * s), 1e-15);
}

TEST(Jet, NestedJetsGiveHigherPartials) {
  // f = X^3 Y^2: f_XXY = 12 X Y, f_XXYY = 12 X
  Expr e = parse("X^3*Y^2");
  using J = Jet2<double>;
  Jet2<J> x(J::var_x(2.0), J(1.0), J(0.0), J(0.0), J(0.0), J(0.0));
  Jet2<J> y(J::var_y(3.0), J(0.0), J(1.0), J(0.0), J(0.0), J(0.0));
  Jet2<J> r = e.eval(x, y);
  EXPECT_DOUBLE_EQ(r.v.v, 72.0);
  EXPECT_DOUBLE_EQ(r.xx.y, 12 * 2 * 3);
  EXPECT_DOUBLE_EQ(r.xx.yy, 12 * 2);
  EXPECT_DOUBLE_EQ(r.xy.v, 6 * 4 * 3);
}

// Central differences in extended precision with h = 1e-5 against jets. The
// scale floor of 1e-2 covers second-difference rounding near zero partials.
TEST(JetProperty, RandomExpressionsMatchFiniteDifferences) {
  testing_support::RandomExpr gen(2024);
  int checked = 0;
  for (int k = 0; k < 1000; ++k) {
    Expr e = parse(gen(4));
    double X = gen.uniform(-1, 1), Y = gen.uniform(-1, 1);
    Jet2<double> j;
    try {
      j = e.jet(X, Y);
    } catch (const Error&) {
      continue;
    }
    using LD = long double;
    const LD h = 1e-5L;
    auto f = [&](LD a, LD b) { return e.eval<LD>(a, b); };
    LD f0 = f(X, Y);
    LD fx = (f(X + h, Y) - f(X - h, Y)) / (2 * h);
    LD fy = (f(X, Y + h) - f(X, Y - h)) / (2 * h);
    LD fxx = (f(X + h, Y) - 2 * f0 + f(X - h, Y)) / (h * h);
    LD fyy = (f(X, Y + h) - 2 * f0 + f(X, Y - h)) / (h * h);
    LD fxy = (f(X + h, Y + h) - f(X + h, Y - h) - f(X - h, Y + h) + f(X - h, Y - h)) / (4 * h * h);
    auto close = [](double jet, LD fd) {
      double scale = std::max({std::abs(jet), static_cast<double>(std::abs(fd)), 1e-2});
      return std::abs(jet - static_cast<double>(fd)) <= 1e-6 * scale;
    };
    EXPECT_TRUE(close(j.x, fx)) << e.print() << " at " << X << "," << Y;
    EXPECT_TRUE(close(j.y, fy)) << e.print();
    EXPECT_TRUE(close(j.xx, fxx)) << e.print() << " " << j.xx << " vs " << static_cast<double>(fxx);
    EXPECT_TRUE(close(j.xy, fxy)) << e.print();
    EXPECT_TRUE(close(j.yy, fyy)) << e.print();
    ++checked;
  }
  EXPECT_GE(checked, 990);
}
