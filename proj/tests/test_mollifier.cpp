#include <array>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <gsfcv/calculus.hpp>
#include <gsfcv/error.hpp>
#include <gsfcv/mollifier.hpp>
#include <gsfcv/quadrature.hpp>

using namespace gsfcv;

namespace {

const Mollifier& m4() {
  static const Mollifier m = Mollifier::build(4);
  return m;
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  QuadratureOptions o;
  o.abs_tol = 1e-13;
  return integrate_adaptive(f, a, b, o).value;
}

constexpr double kEpsMin = 3.0517578125e-05;  // 2^-15

}  // namespace

TEST(Mollifier, MassAndMoments) {
  const auto& m = m4();
  EXPECT_NEAR(m.moment(0), 1.0, 1e-10);
  EXPECT_EQ(m.moment(1), 0.0);
  EXPECT_EQ(m.moment(3), 0.0);
  EXPECT_LE(std::abs(m.moment(2)), 1e-8);
  EXPECT_LE(std::abs(m.moment(4)), 1e-8);
  EXPECT_GT(std::abs(m.moment(6)), 1e-6);
}

class MollifierOrders : public ::testing::TestWithParam<int> {};

TEST_P(MollifierOrders, MomentsVanishUpToOrder) {
  const auto m = Mollifier::build(GetParam());
  EXPECT_NEAR(m.moment(0), 1.0, 1e-10);
  for (int k = 1; k <= GetParam(); ++k) EXPECT_LE(std::abs(m.moment(k)), 1e-8) << "k=" << k;
}

INSTANTIATE_TEST_SUITE_P(EvenOrders, MollifierOrders, ::testing::Values(2, 4, 6, 8, 10, 12));

TEST(Mollifier, ValueAtOriginOracles) {
  EXPECT_NEAR(Mollifier::build(2).value_at_origin(), 1.56884, 1e-5);
  EXPECT_NEAR(Mollifier::build(4).value_at_origin(), 2.27788, 1e-5);
  EXPECT_NEAR(Mollifier::build(6).value_at_origin(), 2.97172, 1e-5);
  EXPECT_NEAR(Mollifier::build(8).value_at_origin(), 3.65639, 1e-5);
}

TEST(Mollifier, MassExcessOracles) {
  // Fixed overshoot of int |psi| over 1 per order; only j <= 6 stays below 1/2.
  const std::array<std::pair<int, double>, 6> eta{
      {{2, 0.247143}, {4, 0.393056}, {6, 0.497930}, {8, 0.580142}, {10, 0.647879}, {12, 0.705535}}};
  for (auto [j, v] : eta) EXPECT_NEAR(Mollifier::build(j).mass_excess(), v, 1e-6) << j;
}

TEST(Mollifier, PeakSitsAtOrigin) {
  const auto& m = m4();
  EXPECT_EQ(m.peak_location(), 0.0);
  EXPECT_DOUBLE_EQ(m.peak(), m.value_at_origin());
}

TEST(Mollifier, RejectsUnsupportedOrders) {
  EXPECT_THROW(Mollifier::build(3), ValidationError);
  EXPECT_THROW(Mollifier::build(0), ValidationError);
  EXPECT_THROW(Mollifier::build(14), ValidationError);
}

TEST(Mollifier, EvenWithCompactSupport) {
  const auto& m = m4();
  for (double s : {0.1, 0.37, 0.8, 0.99}) EXPECT_EQ(m.profile(s), m.profile(-s));
  EXPECT_EQ(m.profile(1.0), 0.0);
  EXPECT_EQ(m.profile(-1.5), 0.0);
}

TEST(Mollifier, PrimitiveMatchesQuadrature) {
  const auto& m = m4();
  for (double s : {-0.9, -0.4, 0.0, 0.25, 0.7}) {
    const double ref = integrate([&](double x) { return m.profile(x); }, -1.0, s);
    EXPECT_NEAR(m.primitive(s), ref, 1e-10) << s;
  }
}

TEST(Delta, SupportAndCenter) {
  const auto& m = m4();
  const double eps = 1.0 / 1024, b = m.b(eps);
  EXPECT_DOUBLE_EQ(b, 32.0);
  EXPECT_EQ(delta_at(m, eps, 1.0 / b), 0.0);
  EXPECT_EQ(delta_at(m, eps, -2.0 / b), 0.0);
  EXPECT_DOUBLE_EQ(delta_at(m, eps, 0.0), b * m.value_at_origin());
  EXPECT_DOUBLE_EQ(delta_at(m, eps, 0.3 / b), b * m.profile(0.3));
}

TEST(Delta, PairingWithCosineTendsToOne) {
  const auto& m = m4();
  const double b = m.b(kEpsMin);
  const double v = integrate([&](double x) { return delta_at(m, kEpsMin, x) * std::cos(x); },
                             -1.0 / b, 1.0 / b);
  EXPECT_NEAR(v, 1.0, 1e-6);
}

TEST(Heaviside, HalfAtOriginAndExactOutside) {
  const auto& m = m4();
  for (double eps : {0.0625, 1.0 / 1024, kEpsMin}) {
    const double b = m.b(eps);
    EXPECT_NEAR(heaviside_at(m, eps, 0.0), 0.5, 1e-8);
    EXPECT_EQ(heaviside_at(m, eps, 1.0001 / b), 1.0);
    EXPECT_EQ(heaviside_at(m, eps, -1.0001 / b), 0.0);
    for (double s : {0.1, 0.5, 0.9})
      EXPECT_NEAR(heaviside_at(m, eps, s / b) + heaviside_at(m, eps, -s / b), 1.0, 1e-8);
  }
}

TEST(Heaviside, DerivativeIsDelta) {
  const auto& m = m4();
  const double eps = kEpsMin, b = m.b(eps);
  auto H = [&](double x) { return heaviside_at(m, eps, x); };
  for (int k = -9; k <= 9; k += 2) {
    const double x = 0.1 * k / b;
    EXPECT_NEAR(stencil_derivative(H, x, 1, 1e-3 / b, -1.0, 1.0), delta_at(m, eps, x), 1e-6 * b);
  }
}

TEST(EmbedPiecewise, SmoothPolynomialIsReproduced) {
  const auto& m = m4();
  const auto f = PiecewisePolynomial::polynomial({0.0, 0.0, 1.0}, -10.0, 10.0);
  for (double x : {-0.5, 0.0, 0.3, 1.7}) EXPECT_NEAR(embed_piecewise(m, f, 0.0625, x), x * x, 1e-6);
}

TEST(EmbedPiecewise, IndicatorMatchesHeaviside) {
  const auto& m = m4();
  const auto f = PiecewisePolynomial::indicator(0.0, std::numeric_limits<double>::infinity());
  const double eps = 1.0 / 256, b = m.b(eps);
  for (double s : {-0.8, -0.2, 0.0, 0.45, 0.95})
    EXPECT_NEAR(embed_piecewise(m, f, eps, s / b), heaviside_at(m, eps, s / b), 1e-8);
}

TEST(EmbedPiecewise, JumpsOfIndicator) {
  const auto f = PiecewisePolynomial::indicator(-1.0, 2.0);
  const auto j = f.jumps();
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0], std::make_pair(-1.0, 1.0));
  EXPECT_EQ(j[1], std::make_pair(2.0, -1.0));
}

TEST(DeltaComposeDelta, OutsideEqualsCenterValue) {
  const auto& m = m4();
  const double eps = 1.0 / 1024, b = m.b(eps);
  EXPECT_DOUBLE_EQ(delta_compose_delta(m, eps, 2.0 / b), b * m.value_at_origin());
  EXPECT_EQ(delta_compose_delta(m, eps, 0.0), 0.0);
  for (double s : {0.2, 0.6, 0.99})
    EXPECT_EQ(delta_compose_delta(m, eps, s / b), delta_compose_delta(m, eps, -s / b));
}

TEST(EmbeddedField, RequiresGridEps) {
  const auto g = make_gauge(Gauge::standard());
  const EmbeddedField H(EmbeddedSource::heaviside, m4(), g);
  EXPECT_NO_THROW(H(g->eps(3), 0.0));
  EXPECT_THROW(H(0.01, 0.0), ValidationError);
  EXPECT_EQ(H.max_derivative_order(), 3);
  EXPECT_DOUBLE_EQ(H.derivative(g->eps(3), 0.0, 1), delta_at(m4(), g->eps(3), 0.0));
}
