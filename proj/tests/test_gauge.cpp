#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include <gsfcv/error.hpp>
#include <gsfcv/gauge.hpp>

using namespace gsfcv;

namespace {

GaugePtr dyadic(std::size_t points = 11) {
  std::vector<double> e;
  for (std::size_t k = 0; k < points; ++k) e.push_back(std::ldexp(1.0, -4 - static_cast<int>(k)));
  return make_gauge(Gauge(GaugeKind::power, e));
}

GenNumber net(const GaugePtr& g, double (*f)(double)) {
  return GenNumber::sample(g, [f](double eps, double) { return f(eps); });
}

}  // namespace

TEST(Gauge, StandardGridIsDyadic) {
  const Gauge g = Gauge::standard();
  ASSERT_EQ(g.size(), 12u);
  EXPECT_EQ(g.eps(0), 0.0625);
  EXPECT_EQ(g.eps(11), std::ldexp(1.0, -15));
}

TEST(Gauge, GeometricHitsBothEnds) {
  const Gauge g = Gauge::geometric(GaugeKind::power, 0.1, 1e-4, 7);
  EXPECT_DOUBLE_EQ(g.eps(0), 0.1);
  EXPECT_NEAR(g.eps(6), 1e-4, 1e-18);
  EXPECT_NEAR(g.eps(3), std::pow(10.0, -2.5), 1e-15);
}

TEST(Gauge, RejectsNonDecreasingGrid) {
  EXPECT_THROW(Gauge(GaugeKind::power, {0.1, 0.2}), ValidationError);
}

TEST(Gauge, ExponentialRho) {
  EXPECT_DOUBLE_EQ(Gauge::rho(GaugeKind::exponential, 0.5), std::exp(-2.0));
  EXPECT_DOUBLE_EQ(Gauge::rho(GaugeKind::power, 0.5), 0.5);
}

TEST(GenArith, SumOfEpsIsTwoEps) {
  const auto g = dyadic();
  const auto e = net(g, [](double x) { return x; });
  const auto s = e + e;
  for (std::size_t i = 0; i < g->size(); ++i) EXPECT_EQ(s[i], 2.0 * g->eps(i));
}

TEST(GenArith, RhoTimesReciprocalIsOne) {
  const auto g = dyadic();
  const auto r = GenNumber::sample(g, [](double, double rho) { return rho; });
  const auto ri = GenNumber::sample(g, [](double, double rho) { return 1.0 / rho; });
  const auto one = r * ri;
  for (double v : one.values()) EXPECT_EQ(v, 1.0);
}

TEST(GenArith, DivisionIsComponentwise) {
  const auto g = dyadic();
  const auto q = net(g, [](double x) { return x * x; }) / net(g, [](double x) { return x; });
  for (std::size_t i = 0; i < g->size(); ++i) EXPECT_EQ(q[i], g->eps(i));
}

TEST(GenArith, DivisionByZeroIsNotInvertible) {
  const auto g = dyadic();
  EXPECT_THROW(GenNumber::constant(g, 1.0) / GenNumber::constant(g, 0.0), InvertibilityError);
}

TEST(GenArith, GridMismatchIsStructural) {
  const auto a = GenNumber::constant(dyadic(11), 1.0);
  const auto b = GenNumber::constant(dyadic(10), 1.0);
  EXPECT_THROW(a + b, StructuralError);
}

TEST(Classify, PowerLawInfinitesimal) {
  const auto c = classify(net(dyadic(), [](double x) { return x * x; }));
  EXPECT_EQ(c.tag, AsymptoticTag::infinitesimal);
  EXPECT_NEAR(c.slope, 2.0, 1e-9);
}

TEST(Classify, OscillatingInfiniteIsUnclassified) {
  const auto c = classify(net(dyadic(), [](double x) { return std::sin(1.0 / x) / x; }));
  EXPECT_EQ(c.tag, AsymptoticTag::unclassified);
}

TEST(Classify, ShiftedConstantIsFinite) {
  EXPECT_EQ(classify(net(dyadic(), [](double x) { return 3.0 + x; })).tag, AsymptoticTag::finite);
}

TEST(Classify, ReciprocalIsInfinite) {
  const auto c = classify(net(dyadic(), [](double x) { return 1.0 / x; }));
  EXPECT_EQ(c.tag, AsymptoticTag::infinite);
  EXPECT_NEAR(c.slope, -1.0, 1e-9);
}

TEST(Classify, ShortGridIsInsufficient) {
  EXPECT_THROW(classify(GenNumber::constant(dyadic(3), 1.0)), InsufficientDataError);
}

TEST(Positivity, EpsHasWitnessTwo) {
  const auto w = is_strictly_positive(net(dyadic(), [](double x) { return x; }));
  EXPECT_TRUE(w.positive);
  EXPECT_EQ(w.m, 2);
}

TEST(Positivity, ZeroAndSignChangesAreNotPositive) {
  const auto g = dyadic();
  EXPECT_FALSE(is_strictly_positive(GenNumber::constant(g, 0.0)).positive);
  EXPECT_FALSE(is_strictly_positive(net(g, [](double x) { return x * std::sin(1.0 / x); })).positive);
}

TEST(Negligible, Examples) {
  const auto g = dyadic();
  EXPECT_TRUE(is_negligible_to_order(net(g, [](double x) { return std::pow(x, 10); }), 5));
  EXPECT_FALSE(is_negligible_to_order(net(g, [](double x) { return x; }), 2));
  EXPECT_TRUE(is_negligible_to_order(net(g, [](double x) { return std::exp(-1.0 / x); }), 5));
}

TEST(FarFrom, Examples) {
  const auto g = dyadic();
  const auto zero = GenNumber::constant(g, 0.0);
  EXPECT_TRUE(is_far_from(GenNumber::constant(g, 1.0), zero));
  EXPECT_TRUE(is_far_from(net(g, [](double x) { return -1.0 / std::log(x); }), zero));
  EXPECT_FALSE(is_far_from(net(g, [](double x) { return x; }), zero));
}

TEST(InfSup, Componentwise) {
  const auto g = dyadic();
  const auto e = net(g, [](double x) { return x; });
  const auto [lo, hi] = inf_sup(e, e + e);
  for (std::size_t i = 0; i < g->size(); ++i) {
    EXPECT_EQ(lo[i], g->eps(i));
    EXPECT_EQ(hi[i], 2.0 * g->eps(i));
  }
  const auto s = net(g, [](double x) { return std::sin(1.0 / x); });
  const auto [lo2, hi2] = inf_sup(s, GenNumber::constant(g, 0.0));
  for (std::size_t i = 0; i < g->size(); ++i) {
    EXPECT_EQ(lo2[i], std::min(s[i], 0.0));
    EXPECT_EQ(hi2[i], std::max(s[i], 0.0));
  }
  const auto [a, b] = inf_sup(e, e);
  EXPECT_EQ(a.values()[3], b.values()[3]);
}
