#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <gsfcv/calculus.hpp>
#include <gsfcv/error.hpp>
#include <gsfcv/mollifier.hpp>

using namespace gsfcv;

namespace {

GsfField exp_field() {
  return GsfField::univariate([](double, double x) { return std::exp(x); },
                              [](double, double x, int) { return std::exp(x); }, 8);
}

GsfField poly_field(std::vector<double> c) {
  auto f = [c](double, double x) {
    double v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
    return v;
  };
  auto df = [c](double, double x, int k) {
    double v = 0.0;
    for (int i = static_cast<int>(c.size()) - 1; i >= k; --i) {
      double fall = 1.0;
      for (int j = 0; j < k; ++j) fall *= i - j;
      v = v * x + c[i] * fall;
    }
    return v;
  };
  return GsfField::univariate(f, df, 8);
}

struct Embedded {
  GaugePtr gauge = make_gauge(Gauge::standard());
  Mollifier m = Mollifier::build(4);
  EmbeddedField H{EmbeddedSource::heaviside, m, gauge};
  EmbeddedField delta{EmbeddedSource::dirac, m, gauge};
};

}  // namespace

TEST(Derivative, SquareFiniteDifference) {
  const auto f = GsfField::univariate_fd([](double, double x) { return x * x; }, 4);
  EXPECT_EQ(f.mode(), DerivativeMode::finite_difference);
  EXPECT_NEAR(gsf_derivative(f, 0.1, 3.0, 1), 6.0, 1e-7);
  EXPECT_NEAR(gsf_derivative(f, 0.1, 3.0, 2), 2.0, 1e-4);
}

TEST(Derivative, OrderAboveDeclaredIsCapabilityError) {
  const auto f = GsfField::univariate_fd([](double, double x) { return x; }, 2);
  EXPECT_THROW(gsf_derivative(f, 0.1, 0.0, 3), CapabilityError);
}

TEST(Derivative, EmbeddedHeaviside) {
  Embedded e;
  const auto H = e.H.as_field();
  const double eps = e.gauge->eps(8), b = e.m.b(eps);
  EXPECT_NEAR(gsf_derivative(H, eps, 0.5, 1), 0.0, 1e-8);
  EXPECT_NEAR(gsf_derivative(H, eps, -0.5, 1), 0.0, 1e-8);
  EXPECT_NEAR(gsf_derivative(H, eps, 0.0, 1), b * e.m.value_at_origin(), 1e-4 * b);
}

TEST(Derivative, DirectionalInTwoDimensions) {
  const GsfField f(
      2, [](double, std::span<const double> x) { return x[0] * x[0] * x[1]; }, 3);
  const std::array<double, 2> x{1.0, 2.0}, v{1.0, -1.0};
  // d/ds (1+s)^2 (2-s) at 0 = 4 - 1.
  EXPECT_NEAR(gsf_derivative(f, 0.1, x, v, 1), 3.0, 1e-7);
}

TEST(Integrate, DeltaHasUnitMass) {
  Embedded e;
  const auto d = e.delta.as_field();
  const double eps = e.gauge->eps(11), b = e.m.b(eps);
  EXPECT_NEAR(integrate_1d(d, eps, -1.0 / b, 1.0 / b, 1e-12), 1.0, 1e-8);
  const std::array<double, 1> layer{0.0};
  EXPECT_NEAR(integrate_1d(d, eps, -1.0, 2.0, 1e-12, layer), 1.0, 1e-8);
}

TEST(Integrate, FundamentalTheorem) {
  const auto df = GsfField::univariate([](double, double x) { return std::cos(x); },
                                       [](double, double x, int) { return -std::sin(x); }, 1);
  EXPECT_NEAR(integrate_1d(df, 0.1, 0.3, 2.1, 1e-12), std::sin(2.1) - std::sin(0.3), 1e-12);
}

TEST(Integrate, ChangeOfVariables) {
  const auto id = poly_field({0.0, 1.0});
  const auto lhs = integrate_1d(id, 0.1, 1.0, 4.0, 1e-12);
  const auto rhs = integrate_1d(poly_field({0.0, 0.0, 0.0, 2.0}), 0.1, 1.0, 2.0, 1e-12);
  EXPECT_NEAR(lhs, 7.5, 1e-12);
  EXPECT_NEAR(rhs, 7.5, 1e-12);
}

TEST(Integrate, ReversedIntervalIsRejected) {
  EXPECT_THROW(integrate_1d(exp_field(), 0.1, 1.0, 0.0), ValidationError);
}

TEST(Algebra, ProductAndChainRules) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = poly_field({U(rng), U(rng), U(rng), U(rng)});
    const auto g = poly_field({U(rng), U(rng), U(rng)});
    const double x = U(rng);
    const auto fg = product(f, g);
    const double lhs = gsf_derivative(fg, 0.1, x, 1);
    const double rhs = gsf_derivative(f, 0.1, x, 1) * g(0.1, x) + f(0.1, x) * gsf_derivative(g, 0.1, x, 1);
    EXPECT_NEAR(lhs, rhs, 1e-12);
    const auto fog = compose(f, g);
    EXPECT_NEAR(gsf_derivative(fog, 0.1, x, 1),
                gsf_derivative(f, 0.1, g(0.1, x), 1) * gsf_derivative(g, 0.1, x, 1), 1e-12);
    const auto s = sum(f, scaled(g, 2.0));
    EXPECT_NEAR(gsf_derivative(s, 0.1, x, 2),
                gsf_derivative(f, 0.1, x, 2) + 2.0 * gsf_derivative(g, 0.1, x, 2), 1e-12);
  }
}

TEST(Algebra, IntegrationByParts) {
  const auto f = poly_field({1.0, -2.0, 0.5});
  const auto g = GsfField::univariate([](double, double x) { return std::sin(3 * x); },
                                      [](double, double x, int k) {
                                        return std::pow(3.0, k) * std::sin(3 * x + k * M_PI / 2);
                                      }, 4);
  const auto fpg = GsfField::univariate_fd(
      [&](double e, double x) { return gsf_derivative(f, e, x, 1) * g(e, x); }, 0);
  const auto fgp = GsfField::univariate_fd(
      [&](double e, double x) { return f(e, x) * gsf_derivative(g, e, x, 1); }, 0);
  const double a = -0.4, b = 1.3;
  const double lhs = integrate_1d(fpg, 0.1, a, b, 1e-13);
  const double rhs = f(0.1, b) * g(0.1, b) - f(0.1, a) * g(0.1, a) - integrate_1d(fgp, 0.1, a, b, 1e-13);
  EXPECT_NEAR(lhs, rhs, 1e-11);
}

TEST(GradedNorm, IdentityOnUnitInterval) {
  const auto g = make_gauge(Gauge::standard());
  const auto n = graded_norm(poly_field({0.0, 1.0}), g, 0, [](double) { return Interval{0.0, 1.0}; });
  for (double v : n.value.values()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(GradedNorm, DeltaPeakGrows) {
  Embedded e;
  const auto n = graded_norm(e.delta.as_field(), e.gauge, 0, [](double) { return Interval{-1.0, 1.0}; });
  for (std::size_t i = 0; i < e.gauge->size(); ++i) {
    const double expected = e.m.b(e.gauge->eps(i)) * e.m.peak();
    EXPECT_NEAR(n.value[i], expected, 1e-6 * expected);
    if (i > 0) EXPECT_GT(n.value[i], n.value[i - 1]);
  }
}

TEST(GradedNorm, TriangleInequality) {
  const auto g = make_gauge(Gauge::standard());
  const auto u = poly_field({0.3, -1.0, 2.0}), v = poly_field({-0.5, 0.7, -1.5, 1.0});
  const auto K = [](double) { return Interval{-1.0, 1.0}; };
  const auto nu = graded_norm(u, g, 2, K), nv = graded_norm(v, g, 2, K), nuv = graded_norm(sum(u, v), g, 2, K);
  for (std::size_t i = 0; i < g->size(); ++i) EXPECT_LE(nuv.value[i], nu.value[i] + nv.value[i] + 1e-12);
}

TEST(Taylor, ExponentialResidualAndHalving) {
  const auto f = exp_field();
  const auto r = taylor_check(f, 0.1, 0.0, 0.1, 3);
  EXPECT_LE(r.residual, 5e-6);
  EXPECT_NEAR(r.residual, r.remainder, 1e-13);
  const auto h = taylor_check(f, 0.1, 0.0, 0.05, 3);
  EXPECT_NEAR(h.residual / r.residual, 1.0 / 16.0, 0.005);
}

TEST(Taylor, FiniteDifferenceFieldDoesNotThrow) {
  const auto f = GsfField::univariate_fd([](double, double x) { return std::sin(x); }, 4);
  const auto r = taylor_check(f, 0.1, 0.2, 0.1, 2);
  EXPECT_NEAR(r.ratio, 1.0, 1e-3);
}

TEST(Taylor, HeavisideFarFromLayer) {
  Embedded e;
  const auto H = e.H.as_field();
  const double eps = e.gauge->eps(6);
  EXPECT_NEAR(taylor_check(H, eps, 0.5, 0.1, 2).residual, 0.0, 1e-10);
  EXPECT_NEAR(taylor_check(H, eps, -0.5, 0.1, 2).residual, 0.0, 1e-10);
}

TEST(Stencil, FourthOrderShiftsInward) {
  auto g = [](double t) { return std::sin(t); };
  EXPECT_NEAR(stencil_derivative(g, 0.5, 1, 1e-2, 0.0, 1.0), std::cos(0.5), 1e-9);
  EXPECT_NEAR(stencil_derivative(g, 0.0, 1, 1e-2, 0.0, 1.0), 1.0, 1e-8);
  EXPECT_NEAR(stencil_derivative(g, 1.0, 2, 1e-2, 0.0, 1.0), -std::sin(1.0), 1e-6);
  EXPECT_NEAR(central_difference(g, 0.3, 1, 1e-4), std::cos(0.3), 1e-8);
}
