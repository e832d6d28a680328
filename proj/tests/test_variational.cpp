#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include <gsfcv/error.hpp>
#include <gsfcv/variational.hpp>

using namespace gsfcv;
using std::numbers::pi;

namespace {

Eigen::VectorXd v1(double x) { return Eigen::VectorXd::Constant(1, x); }

// L = a/2 qdot^2 + c/2 q^2 - f(t) q with analytic partials.
Lagrangian quadratic(double a, double c, std::function<double(double)> f = {},
                     std::function<double(double)> df = {}) {
  auto F = f ? f : [](double) { return 0.0; };
  auto dF = df ? df : [](double) { return 0.0; };
  return Lagrangian(
      1, 1,
      [=](double, const Jet& j) {
        const double q = j.q[0][0], v = j.q[1][0];
        return 0.5 * a * v * v + 0.5 * c * q * q - F(j.t) * q;
      },
      [=](double, const Jet& j, int i) {
        return i == 0 ? v1(c * j.q[0][0] - F(j.t)) : v1(a * j.q[1][0]);
      },
      [=](double, const Jet& j) { return -dF(j.t) * j.q[0][0]; }, !f);
}

Path scalar(double t1, double t2, std::function<double(double, int)> d) {
  return Path::scalar(t1, t2, 6, std::move(d));
}

Path line(double t1, double t2, double a, double b) {
  return scalar(t1, t2, [=](double t, int k) { return k == 0 ? a + b * t : k == 1 ? b : 0.0; });
}

Path trig(double t1, double t2, bool cosine) {
  return scalar(t1, t2, [=](double t, int k) {
    const double phase = cosine ? pi / 2 : 0.0;
    return std::sin(t + phase + k * pi / 2);
  });
}

}  // namespace

TEST(Action, Examples) {
  EXPECT_NEAR(action(quadratic(1, 0), line(0, 1, 0, 1), 0.1), 0.5, 1e-12);
  EXPECT_NEAR(action(quadratic(1, 0), trig(0, pi, false), 0.1), pi / 4, 1e-8);
}

TEST(FirstVariation, VanishesOnStraightLine) {
  const auto h = test_direction(0, 1, 2, 2, 4);
  EXPECT_NEAR(first_variation(quadratic(1, 0), line(0, 1, 0.3, -1.2), h, 0.1).value, 0.0, 1e-8);
}

TEST(FirstVariation, LinearPotential) {
  const auto L = quadratic(1, 0, [](double) { return 1.0; }, [](double) { return 0.0; });
  const auto h = scalar(0, 1, [](double t, int k) { return std::pow(pi, k) * std::sin(pi * t + k * pi / 2); });
  const auto r = first_variation(L, line(0, 1, 0, 1), h, 0.1);
  EXPECT_NEAR(r.value, -2.0 / pi, 1e-8);
  EXPECT_NEAR(first_variation_fd(L, line(0, 1, 0, 1), h, 0.1).value, -2.0 / pi, 1e-6);
}

TEST(FirstVariation, BoundaryViolationIsRejected) {
  const auto h = scalar(0, 1, [](double t, int k) { return k == 0 ? 1.0 + t : k == 1 ? 1.0 : 0.0; });
  EXPECT_THROW(first_variation(quadratic(1, 0), line(0, 1, 0, 1), h, 0.1), ValidationError);
}

TEST(SecondVariation, Examples) {
  const auto h = scalar(0, 1, [](double t, int k) { return std::pow(pi, k) * std::sin(pi * t + k * pi / 2); });
  EXPECT_NEAR(second_variation(quadratic(1, 0), line(0, 1, 0, 1), h, 0.1).value, pi * pi / 2, 1e-5);
  EXPECT_GT(second_variation(quadratic(1, 1), trig(0, 1, false), h, 0.1).value, 0.0);
}

TEST(EulerLagrange, HarmonicOscillator) {
  const auto L = quadratic(1, -1);
  const auto q = trig(0, 5, true);
  for (double t : {0.3, 1.7, 2.9, 4.4}) EXPECT_NEAR(el_residual(L, q, 0.1, t)[0], 0.0, 1e-8);
}

TEST(Phi, MomentumOfFirstOrderLagrangian) {
  const auto phi = phi_operators(quadratic(1, 0), line(0, 1, 0, 1), 0.1, 0.4);
  ASSERT_EQ(phi.size(), 2u);
  EXPECT_NEAR(phi[1][0], 1.0, 1e-12);
}

TEST(Phi, SecondOrderRecurrence) {
  // L = 1/2 qddot^2 - 1/2 q^2 along q = sin t (not an extremal).
  const Lagrangian L(
      2, 1,
      [](double, const Jet& j) {
        return 0.5 * j.q[2][0] * j.q[2][0] - 0.5 * j.q[0][0] * j.q[0][0];
      },
      [](double, const Jet& j, int i) {
        return v1(i == 0 ? -j.q[0][0] : i == 1 ? 0.0 : j.q[2][0]);
      },
      [](double, const Jet&) { return 0.0; }, true);
  const auto q = trig(0, 3, false);
  EXPECT_LE(phi_recurrence_residual(L, q, 0.1, 1.2), 1e-6);
}

TEST(DuBoisReymond, AutonomousEnergyRate) {
  const auto L = quadratic(1, -1);
  const auto q = trig(0, 5, true);
  for (double t : {0.5, 2.5}) EXPECT_NEAR(dbr_residual(L, q, 0.1, t), 0.0, 1e-5);
}

TEST(DuBoisReymond, TimeDependentForcing) {
  // L = 1/2 qdot^2 - t q: extremals satisfy qddot = -t.
  const auto L = quadratic(1, 0, [](double t) { return t; }, [](double) { return 1.0; });
  const auto q = scalar(0, 2, [](double t, int k) {
    switch (k) {
      case 0: return -t * t * t / 6 + 0.5 * t + 0.2;
      case 1: return -t * t / 2 + 0.5;
      case 2: return -t;
      case 3: return -1.0;
      default: return 0.0;
    }
  });
  for (double t : {0.4, 1.0, 1.6}) EXPECT_NEAR(dbr_residual(L, q, 0.1, t), 0.0, 1e-6);
}

TEST(DAlembert, ForcedDampedOscillator) {
  // qddot + 2 r qdot + q = 0 from L = 1/2 qdot^2 - 1/2 q^2 and Q = -2 r qdot.
  const double r = 0.3, w = std::sqrt(1 - r * r);
  const auto L = quadratic(1, -1);
  const GeneralizedForce Q = [r](double, const Jet& j) { return v1(-2 * r * j.q[1][0]); };
  const auto q = scalar(0, 4, [=](double t, int k) {
    // Derivatives of exp(-r t) sin(w t) via the complex exponent s = -r + i w.
    const std::complex<double> s(-r, w);
    return std::imag(std::pow(s, k) * std::exp(s * t));
  });
  for (double t : {0.5, 1.5, 3.0}) {
    EXPECT_NEAR(dalembert_residual(L, Q, q, 0.1, t)[0], 0.0, 1e-9);
    EXPECT_NEAR(dbr_residual(L, Q, q, 0.1, t), 0.0, 1e-6);
    EXPECT_GT(std::abs(dbr_residual(L, q, 0.1, t)), 1e-3);
  }
}

TEST(Noether, TimeTranslationGivesConstantEnergy) {
  const auto L = quadratic(1, -1);
  const auto q = trig(0, 5, true);
  const auto sym = Symmetry::time_translation(1);
  const double c0 = noether_constant(L, q, sym, 0.1, 0.5);
  EXPECT_NEAR(noether_constant(L, q, sym, 0.1, 3.5), c0, 1e-7);
  EXPECT_NEAR(std::abs(c0), 0.5, 1e-7);
}

TEST(Lagrangian, InconsistentPartialsAreDetected) {
  const Lagrangian bad(1, 1, [](double, const Jet& j) { return 0.5 * j.q[1][0] * j.q[1][0]; },
                       [](double, const Jet& j, int i) { return v1(i == 0 ? 1.0 : j.q[1][0]); });
  EXPECT_THROW(bad.validate_partials(0.1, 1), ConsistencyError);
  EXPECT_NO_THROW(quadratic(1, -1).validate_partials(0.1, 1));
}

TEST(TestDirection, VanishesAtEnds) {
  const auto h = test_direction(0.5, 2.0, 3, 2, 4);
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(h(0.5, k)[0], 0.0, 1e-14);
    EXPECT_NEAR(h(2.0, k)[0], 0.0, 1e-14);
  }
}
