#include <cmath>
#include <array>
#include <numbers>

#include <gtest/gtest.h>

#include <gsfcv/dynamics.hpp>
#include <gsfcv/error.hpp>

using namespace gsfcv;

namespace {

constexpr double kEps = 3.0517578125e-05;  // 2^-15, b = 181.02

const Mollifier& m4() {
  static const Mollifier m = Mollifier::build(4);
  return m;
}

SystemSpec make(SystemKind k, SystemParams p = {}) { return SystemSpec(k, p, m4()); }

State vec(std::initializer_list<double> v) {
  State s(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) s[i++] = x;
  return s;
}


}  // namespace

TEST(Pendulum, FarFieldEquations) {
  const auto s = make(SystemKind::pendulum);
  const auto& p = s.params();
  EXPECT_NEAR(pendulum_rhs(s, kEps, 0, -0.2, 0.7), -p.g * std::sin(-0.2) / (p.L1 + p.L2), 1e-12);
  EXPECT_NEAR(pendulum_rhs(s, kEps, 0, 0.3, 0.7), -p.g * std::sin(0.3) / p.L2, 1e-12);
  EXPECT_NEAR(pendulum_length(s, kEps, p.theta0), p.L2 + 0.5 * p.L1, 1e-8);
}

TEST(Pendulum, EnergyAtRest) {
  const auto s = make(SystemKind::pendulum);
  EXPECT_NEAR(energy(s, kEps, vec({0.0, 1.0}), 0.0), 0.5 * 0.36 - 9.8 * 0.6, 1e-12);
}

TEST(Pendulum, CrossesLayerAndConservesEnergyAwayFromIt) {
  const auto s = make(SystemKind::pendulum);
  const auto tr = integrate(s, kEps, vec({0.0, 1.0}), 0.0, 2.0);
  EXPECT_FALSE(tr.layer_crossings().empty());
  const auto& E = tr.energy();
  ASSERT_EQ(E.size(), tr.times().size());
  const double b = tr.b();
  double far_drift = 0.0;
  for (std::size_t i = 1; i < E.size(); ++i) {
    const double th0 = tr.states()[i - 1][0], th1 = tr.states()[i][0];
    if (std::abs(th0 - s.params().theta0) > 1 / b && std::abs(th1 - s.params().theta0) > 1 / b &&
        (th0 < s.params().theta0) == (th1 < s.params().theta0))
      far_drift = std::max(far_drift, std::abs(E[i] - E[i - 1]));
  }
  EXPECT_LE(far_drift, 1e-6 * std::abs(E.front()));
}

TEST(SmallOscillation, Frequency) {
  const auto s = make(SystemKind::pendulum);
  const auto ref = small_oscillation_reference(s, OscillationSide::below, 0.0, 0.01);
  EXPECT_NEAR(ref.omega, std::sqrt(9.8 / 0.6), 1e-12);
  EXPECT_NEAR(ref.omega, 4.0415, 1e-4);
  EXPECT_NEAR(ref(0.0), 0.01, 1e-15);
  EXPECT_NEAR(ref.derivative(0.0), 0.0, 1e-15);
}

TEST(SmallOscillation, LinearizationErrorOverQuarterPeriod) {
  const auto s = make(SystemKind::pendulum);
  const auto ref = small_oscillation_reference(s, OscillationSide::below, 0.0, 0.01);
  const double quarter = std::numbers::pi / (2 * ref.omega);
  const auto tr = integrate(s, kEps, vec({0.01, 0.0}), 0.0, quarter);
  double err = 0.0;
  for (std::size_t i = 0; i < tr.times().size(); ++i)
    err = std::max(err, std::abs(tr.states()[i][0] - ref(tr.times()[i])));
  EXPECT_LE(err, 5e-5);
}

TEST(SmallOscillation, AboveSideAnchor) {
  const auto s = make(SystemKind::pendulum);
  const auto a = small_oscillation_reference(s, OscillationSide::above, 1.0, 0.1, -0.3);
  EXPECT_NEAR(a.omega, std::sqrt(9.8 / 0.2), 1e-12);
  EXPECT_NEAR(a(1.0), 0.1, 1e-15);
  EXPECT_NEAR(a.derivative(1.0), -0.3, 1e-14);
}

TEST(SmallOscillation, SharpJoinSwitches) {
  const auto s = make(SystemKind::pendulum);
  const auto lo = small_oscillation_reference(s, OscillationSide::below, 0.0, 0.01);
  const auto hi = small_oscillation_reference(s, OscillationSide::above, 0.5, 0.02);
  EXPECT_EQ(joined_small_oscillation(lo, hi, 0.5, nullptr, 0.0, 0.4), lo(0.4));
  EXPECT_EQ(joined_small_oscillation(lo, hi, 0.5, nullptr, 0.0, 0.6), hi(0.6));
  EXPECT_NEAR(joined_small_oscillation(lo, hi, 0.5, &m4(), kEps, 0.6), hi(0.6), 1e-15);
}

TEST(Damped, DampingCoefficient) {
  const auto s = make(SystemKind::damped_two_media);
  const auto& p = s.params();
  EXPECT_NEAR(damping(s, kEps, 0.5), p.beta1, 1e-15);
  EXPECT_NEAR(damping(s, kEps, -0.5), p.beta1, 1e-15);
  EXPECT_NEAR(damping(s, kEps, 0.0), p.beta2, 1e-15);
}

TEST(Damped, AccelerationJumpAtLayer) {
  const auto s = make(SystemKind::damped_two_media);
  const auto& p = s.params();
  const double v = 0.9, w = 1.0001 / m4().b(kEps);
  const double inside = damped_rhs(s, kEps, 0, p.theta0 - w, v);
  const double outside = damped_rhs(s, kEps, 0, p.theta0 + w, v);
  const double gravity = -p.g / p.Lambda * (std::sin(p.theta0 - w) - std::sin(p.theta0 + w));
  EXPECT_NEAR(inside - outside - gravity, -2 * (p.beta2 - p.beta1) * v, 1e-12);
}

TEST(Damped, HasNoEnergy) {
  EXPECT_THROW(energy(make(SystemKind::damped_two_media), kEps, vec({0, 1}), 0), CapabilityError);
}

TEST(PaisUhlenbeck, AnalyticFitAtInitialFrequencies) {
  const auto a = pu_analytic(0.7, 1.2, {1.0, 2.0, 0.0, 1.0});
  EXPECT_NEAR(a.A1, 6.028268, 1e-6);
  EXPECT_NEAR(a.A2, 1.811811, 1e-6);
  EXPECT_NEAR(a.phi1, 0.254175, 1e-6);
  EXPECT_NEAR(a.phi2, -2.852918, 1e-6);
  const std::array<double, 4> ic{1.0, 2.0, 0.0, 1.0};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(a(0.0, k), ic[k], 1e-10);
}

TEST(PaisUhlenbeck, AnalyticFitAtSwitchedFrequencies) {
  const auto a = pu_analytic(0.5, 1.0, {1.0, 2.0, 0.0, 1.0});
  EXPECT_NEAR(a.A1, 8.110350, 1e-6);
  EXPECT_NEAR(a.A2, 2.027588, 1e-6);
  EXPECT_NEAR(a.phi1, 0.165149, 1e-6);
  EXPECT_NEAR(a.phi2, -2.976444, 1e-6);
}

TEST(PaisUhlenbeck, ZeroAndDegenerateFits) {
  const auto z = pu_analytic(0.5, 1.0, {0.0, 0.0, 0.0, 0.0});
  EXPECT_EQ(z.A1, 0.0);
  EXPECT_EQ(z.A2, 0.0);
  EXPECT_THROW(pu_analytic(0.8, 0.8, {1, 0, 0, 0}), DegeneracyError);
}

TEST(PaisUhlenbeck, ConstantFrequencyCharacteristicRoot) {
  const auto s = make(SystemKind::pais_uhlenbeck);
  const double w = 0.7, t = 2.0;
  const double q = std::sin(w * t), d2 = -w * w * q;
  EXPECT_NEAR(pu_rhs(s, kEps, t, q, w * std::cos(w * t), d2, -w * w * w * std::cos(w * t)),
              w * w * w * w * q, 1e-12);
}

TEST(PaisUhlenbeck, EnergyBeforeAndAfterSwitch) {
  const auto s = make(SystemKind::pais_uhlenbeck);
  const State ic = vec({1.0, 2.0, 0.0, 1.0});
  EXPECT_NEAR(energy(s, kEps, ic, 0.0), 6.2128, 1e-12);
  const auto tr = integrate(s, kEps, ic, 0.0, 30.0);
  const auto& E = tr.energy();
  EXPECT_NEAR(E.front(), 6.2128, 1e-12);
  EXPECT_NEAR(E[tr.times().size() / 4], 6.2128, 1e-6);
  EXPECT_NEAR(E.back(), 3.528, 1e-3);
  const auto fit = pu_analytic(0.7, 1.2, {1.0, 2.0, 0.0, 1.0});
  EXPECT_NEAR(tr.state(10.0)[0], fit(10.0), 1e-7);
}

TEST(PaisUhlenbeck, FrequenciesFollowSwitch) {
  const auto s = make(SystemKind::pais_uhlenbeck);
  const auto before = pu_frequencies(s, kEps, 5.0), after = pu_frequencies(s, kEps, 25.0);
  EXPECT_EQ(before.w1, 0.7);
  EXPECT_EQ(before.w2, 1.2);
  EXPECT_EQ(after.w1, 0.5);
  EXPECT_EQ(after.w2, 1.0);
  EXPECT_EQ(before.dw1, 0.0);
}

TEST(Dynamics, IcLengthIsValidated) {
  EXPECT_THROW(integrate(make(SystemKind::pendulum), kEps, vec({0.0}), 0.0, 1.0), ValidationError);
}

TEST(Dynamics, SystemNames) {
  EXPECT_EQ(system_kind_from_string("pais_uhlenbeck"), SystemKind::pais_uhlenbeck);
  EXPECT_STREQ(to_string(SystemKind::damped_two_media), "damped_two_media");
  EXPECT_THROW(system_kind_from_string("spring"), ValidationError);
}
