#include <gtest/gtest.h>

#include <random>

#include "geoctl/vecfield/numfield.hpp"
#include "geoctl/vecfield/parser.hpp"
#include "geoctl/vecfield/polynomial.hpp"
#include "geoctl/vecfield/vector_field.hpp"
#include "test_support.hpp"

using namespace geoctl;
using namespace geoctl::testing;

namespace {

Rational q(long a, long b = 1) {
  Rational r(a, b);
  r.canonicalize();
  return r;
}

/// Flow of a polynomial field for time t by RK4 with `steps` steps.
Vec flow(const CompiledField& f, Vec x, double t, int steps = 4) {
  const double h = t / steps;
  Vec k1, k2, k3, k4;
  for (int s = 0; s < steps; ++s) {
    f.value(x, k1);
    f.value(x + 0.5 * h * k1, k2);
    f.value(x + 0.5 * h * k2, k3);
    f.value(x + h * k3, k4);
    x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return x;
}

}  // namespace

TEST(PolyEval, SquareOfSingleVariable) {
  const auto p = parse_polynomial("x1^2", {"x1"});
  EXPECT_EQ(poly_eval(p, RationalVector{q(3)}), q(9));
}

TEST(PolyEval, ZeroPolynomialIsZeroEverywhere) {
  Polynomial p(3);
  EXPECT_TRUE(p.is_zero());
  EXPECT_EQ(poly_eval(p, RationalVector{q(1), q(-2), q(7, 3)}), q(0));
  EXPECT_EQ(poly_eval(p, std::vector<double>{1.5, 2.0, -3.0}), 0.0);
}

TEST(PolyEval, MixedTermsExactRational) {
  const auto p = parse_polynomial("x1*x2 + (1/2)*x1^2", xnames(2));
  EXPECT_EQ(poly_eval(p, RationalVector{q(1), q(2)}), q(5, 2));
  EXPECT_DOUBLE_EQ(poly_eval(p, std::vector<double>{1.0, 2.0}), 2.5);
}

TEST(PolyEval, DimensionMismatchThrows) {
  const auto p = parse_polynomial("x1", xnames(2));
  EXPECT_THROW(poly_eval(p, RationalVector{q(1)}), DimensionMismatch);
}

TEST(Polynomial, NoZeroTermsStored) {
  auto p = parse_polynomial("x1 - x1 + 0*x2", xnames(2));
  EXPECT_TRUE(p.is_zero());
  auto r = parse_polynomial("(x1+x2)^2 - x1^2 - x2^2", xnames(2));
  EXPECT_EQ(r.size(), 1U);
  EXPECT_EQ(r.coefficient({1, 1}), q(2));
}

TEST(Polynomial, DerivativeAndRemap) {
  const auto p = parse_polynomial("x1^3*x2 + 4*x2", xnames(2));
  EXPECT_EQ(p.derivative(0), parse_polynomial("3*x1^2*x2", xnames(2)));
  const auto r = p.remap(3, {2, 0});
  EXPECT_EQ(r, parse_polynomial("x3^3*x1 + 4*x1", xnames(3)));
  EXPECT_THROW(p.remap(2, {0, -1}), DimensionMismatch);
}

TEST(Polynomial, ExactDivision) {
  const auto n = xnames(3);
  const auto a = parse_polynomial("x1^2 - x2^2", n);
  const auto b = parse_polynomial("x1 + x2", n);
  const auto d = divide_exact(a, b);
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(*d, parse_polynomial("x1 - x2", n));
  EXPECT_FALSE(divide_exact(a, parse_polynomial("x1 + x3", n)).has_value());
}

TEST(Polynomial, CompiledMatchesExact) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto p = random_polynomial(rng, 4, 5, 8);
    const auto x = random_point(rng, 4);
    CompiledPolynomials c({p});
    const auto xd = to_double(x);
    double v = 0.0;
    c.eval(xd.data(), &v);
    EXPECT_NEAR(v, p.eval(x).get_d(), 1e-9 * (1 + std::abs(v)));
  }
}

TEST(Parser, DecimalAndNestedParentheses) {
  const auto p = parse_polynomial("0.25*(x1 - 2*(x2 + 1))^2", xnames(2));
  EXPECT_EQ(p.eval(RationalVector{q(4), q(0)}), q(1));
}

TEST(Parser, UnaryMinusBindsLooserThanPower) {
  const auto p = parse_polynomial("-x1^2", xnames(1));
  EXPECT_EQ(p.eval(RationalVector{q(3)}), q(-9));
}

TEST(Parser, ReportsColumnOfUnknownVariable) {
  try {
    parse_polynomial("x1 + y7", xnames(2));
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.column(), 6U);
  }
}

TEST(Parser, RejectsDivisionByVariableAndTrailingGarbage) {
  EXPECT_THROW(parse_polynomial("x1/x2", xnames(2)), ParseError);
  EXPECT_THROW(parse_polynomial("x1 + ", xnames(2)), ParseError);
  EXPECT_THROW(parse_polynomial("x1 )", xnames(2)), ParseError);
  EXPECT_THROW(parse_polynomial("x1/0", xnames(2)), ParseError);
  EXPECT_THROW(parse_polynomial("", xnames(2)), ParseError);
}

TEST(Parser, ToStringRoundTrips) {
  std::mt19937_64 rng(11);
  const auto n = xnames(4);
  for (int t = 0; t < 25; ++t) {
    const auto p = random_polynomial(rng, 4, 4, 6);
    EXPECT_EQ(parse_polynomial(p.to_string(n), n), p) << p.to_string(n);
  }
}

TEST(LieBracket, SelfBracketIsZero) {
  std::mt19937_64 rng(5);
  const auto x = random_field(rng, 4, 3, 4);
  EXPECT_TRUE(lie_bracket(x, x).is_zero());
}

TEST(LieBracket, CoordinateAgainstLinearField) {
  const auto n = xnames(2);
  const auto b = lie_bracket(field({"1", "0"}, n), field({"0", "x1"}, n));
  EXPECT_EQ(b, field({"0", "1"}, n));
}

TEST(LieBracket, FreeNilpotentFirstBracket) {
  const auto f = m5_frame();
  const auto n = xnames(5);
  const auto b = lie_bracket(f[0], f[1]);
  EXPECT_EQ(b, field({"0", "0", "1", "x1", "x2"}, n));
}

TEST(LieBracket, FiniteDifferenceOracleAtRandomPoints) {
  // [X,Y](x) = DY(x) X(x) - DX(x) Y(x) with central differences, step 1e-4.
  const auto f = m5_frame();
  const auto b = lie_bracket(f[0], f[1]);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> x(5);
    for (auto& v : x) v = u(rng);
    const double h = 1e-4;
    auto jac = [&](const PolyVectorField& fld) {
      Mat j(5, 5);
      for (int c = 0; c < 5; ++c) {
        auto xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        j.col(c) = (to_vec(fld.eval(xp)) - to_vec(fld.eval(xm))) / (2 * h);
      }
      return j;
    };
    const Vec fd = jac(f[1]) * to_vec(f[0].eval(x)) - jac(f[0]) * to_vec(f[1].eval(x));
    EXPECT_LE((fd - to_vec(b.eval(x))).norm(), 1e-6);
  }
}

TEST(LieBracket, FlowCommutatorRichardson) {
  // Phi^Y_{-h} Phi^X_{-h} Phi^Y_h Phi^X_h (x) = x + h^2 [X,Y](x) + O(h^3).
  std::mt19937_64 rng(23);
  const auto n = xnames(3);
  const auto X = field({"1 + x2^2", "x3", "x1*x2"}, n);
  const auto Y = field({"x2", "1 - x1*x3", "x1^2/2"}, n);
  const auto B = lie_bracket(X, Y);
  CompiledField cx(X), cy(Y);
  for (int t = 0; t < 20; ++t) {
    auto xr = random_point(rng, 3);
    for (auto& v : xr) v /= 4;
    const Vec x = to_vec(to_double(xr));
    auto est = [&](double h) {
      Vec z = flow(cx, x, h);
      z = flow(cy, z, h);
      z = flow(cx, z, -h);
      z = flow(cy, z, -h);
      return Vec((z - x) / (h * h));
    };
    const Vec e1 = est(1e-3), e2 = est(5e-4);
    const Vec rich = 2 * e2 - e1;
    const Vec exact = to_vec(to_double(B.eval(xr)));
    EXPECT_LE((rich - exact).norm(), 1e-5 * (1 + exact.norm()));
    EXPECT_LE((rich - exact).norm(), (e2 - exact).norm() + 1e-9);
  }
}

TEST(LieBracket, JacobiIdentityExact) {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 5; ++t) {
    const auto X = random_field(rng, 5, 3, 3);
    const auto Y = random_field(rng, 5, 3, 3);
    const auto Z = random_field(rng, 5, 3, 3);
    const auto j = lie_bracket(lie_bracket(X, Y), Z) + lie_bracket(lie_bracket(Y, Z), X) + lie_bracket(lie_bracket(Z, X), Y);
    EXPECT_TRUE(j.is_zero());
  }
}

TEST(LieBracket, BilinearAndAntisymmetric) {
  std::mt19937_64 rng(31);
  const auto X = random_field(rng, 4, 3, 3);
  const auto Y = random_field(rng, 4, 3, 3);
  const auto Z = random_field(rng, 4, 3, 3);
  const Rational a(3, 5), b(-2);
  EXPECT_EQ(lie_bracket(a * X + b * Y, Z), a * lie_bracket(X, Z) + b * lie_bracket(Y, Z));
  EXPECT_EQ(lie_bracket(X, Y), Rational(-1) * lie_bracket(Y, X));
}

TEST(LieBracket, DimensionMismatchThrows) {
  EXPECT_THROW(lie_bracket(PolyVectorField::coordinate(2, 0), PolyVectorField::coordinate(3, 0)), DimensionMismatch);
}

TEST(Pairing, DxThreeAgainstFirstBracketAtOrigin) {
  const auto b = lie_bracket(m5_frame()[0], m5_frame()[1]);
  Covector<Rational> p(RationalVector(5, q(0)), {q(0), q(0), q(1), q(0), q(0)});
  EXPECT_EQ(pairing(p, b), q(1));
}

TEST(Pairing, OrthogonalCoordinateCovector) {
  Covector<Rational> p({q(3), q(-1)}, {q(1), q(0)});
  EXPECT_EQ(pairing(p, PolyVectorField::coordinate(2, 1)), q(0));
}

TEST(Pairing, LinearFieldAtPoint) {
  Covector<Rational> p({q(1), q(0)}, {q(2), q(1)});
  EXPECT_EQ(pairing(p, field({"x1", "0"}, xnames(2))), q(2));
  Covector<double> pd({1.0, 0.0}, {2.0, 1.0});
  EXPECT_DOUBLE_EQ(pairing(pd, field({"x1", "0"}, xnames(2))), 2.0);
}

TEST(PushforwardProjection, ConstantFieldHasNoActiveParameters) {
  Chart c({"x1", "w1"});
  const auto r = pushforward_projection(field({"1", "1"}, c.names), c, {0});
  EXPECT_EQ(r.chart.names, std::vector<std::string>{"x1"});
  ASSERT_EQ(r.components.size(), 1U);
  EXPECT_EQ(r.components[0], Polynomial::constant(2, 1));
  EXPECT_FALSE(r.depends_on_params());
}

TEST(PushforwardProjection, DroppedCoordinateBecomesParameter) {
  Chart c({"x1", "w1"});
  const auto r = pushforward_projection(field({"w1", "0"}, c.names), c, {0});
  EXPECT_EQ(r.params, std::vector<std::string>{"w1"});
  EXPECT_TRUE(r.depends_on_params());
  EXPECT_EQ(r.components[0], parse_polynomial("w1", {"x1", "w1"}));
}

TEST(PushforwardProjection, LeafChartFrameKeepsHorizontalPart) {
  // xi = sum c_i(x,w) d/dx_i + f(x,w) d/dw on (x1..x5, w).
  Chart c({"x1", "x2", "x3", "x4", "x5", "w"});
  const auto xi = field({"1 - w^2/2", "w", "x2*w", "x1 + w^3", "x3", "x1*w"}, c.names);
  const auto r = pushforward_projection(xi, c, {0, 1, 2, 3, 4});
  EXPECT_EQ(r.chart.dim(), 5U);
  EXPECT_EQ(r.params, std::vector<std::string>{"w"});
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(r.components[i], xi[i]);
}

TEST(CompiledField, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(37);
  const auto X = random_field(rng, 4, 4, 5);
  CompiledField cf(X);
  LambdaField lf(4, 4, [&](const Vec& z, Vec& o) { cf.value(z, o); });
  const Vec z = Vec::Random(4) * 0.5;
  Mat a, b;
  cf.jacobian(z, a);
  lf.jacobian(z, b);
  EXPECT_LE((a - b).norm(), 1e-7 * (1 + a.norm()));
}
