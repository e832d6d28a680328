#include <cmath>

#include <gtest/gtest.h>

#include <gsfcv/error.hpp>
#include <gsfcv/ode.hpp>

using namespace gsfcv;

namespace {

State vec(std::initializer_list<double> v) {
  State s(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) s[i++] = x;
  return s;
}

OdeRhs harmonic() {
  return [](double, const State& y, State& dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
}

}  // namespace

TEST(Dop853, ExponentialGrowth) {
  const auto sol = integrate_dop853([](double, const State& y, State& dy) { dy = y; }, 0.0,
                                    vec({1.0}), 2.0);
  EXPECT_NEAR(sol(2.0)[0], std::exp(2.0), 1e-9 * std::exp(2.0));
}

TEST(Dop853, DenseOutputBetweenSteps) {
  const auto sol = integrate_dop853(harmonic(), 0.0, vec({0.0, 1.0}), 10.0);
  for (double t = 0.0; t <= 10.0; t += 0.37) {
    const State y = sol(t);
    EXPECT_NEAR(y[0], std::sin(t), 1e-8) << t;
    EXPECT_NEAR(y[1], std::cos(t), 1e-8) << t;
  }
  EXPECT_GT(sol.accepted_steps(), 0u);
  EXPECT_EQ(sol.times().front(), 0.0);
  EXPECT_EQ(sol.times().back(), 10.0);
}

TEST(Dop853, BackwardIntegration) {
  const auto sol = integrate_dop853(harmonic(), 1.0, vec({std::sin(1.0), std::cos(1.0)}), -2.0);
  EXPECT_EQ(sol.direction(), -1.0);
  EXPECT_NEAR(sol(-2.0)[0], std::sin(-2.0), 1e-8);
}

TEST(Dop853, EventsAreLocatedAndAligned) {
  OdeOptions o;
  o.events.push_back([](double, const State& y) { return y[0]; });
  const auto sol = integrate_dop853(harmonic(), 0.1, vec({std::sin(0.1), std::cos(0.1)}), 7.0, o);
  ASSERT_EQ(sol.events().size(), 2u);
  EXPECT_NEAR(sol.events()[0].t, M_PI, 1e-10);
  EXPECT_NEAR(sol.events()[1].t, 2 * M_PI, 1e-10);
  bool aligned = false;
  for (double t : sol.times()) aligned |= t == sol.events()[0].t;
  EXPECT_TRUE(aligned);
}

TEST(Dop853, StepCapIsHonoured) {
  OdeOptions o;
  o.step_cap = [](double, const State&) { return 0.01; };
  const auto sol = integrate_dop853(harmonic(), 0.0, vec({0.0, 1.0}), 1.0, o);
  const auto& t = sol.times();
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_LE(t[i] - t[i - 1], 0.01 + 1e-15);
}

TEST(Dop853, BlowUpIsDivergence) {
  try {
    integrate_dop853([](double, const State& y, State& dy) { dy[0] = y[0] * y[0]; }, 0.0,
                     vec({1.0}), 2.0);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_LE(e.time(), 1.0 + 1e-6);
    EXPECT_GT(e.time(), 0.9);
  }
}

TEST(Dop853, StepBudgetIsStiffness) {
  OdeOptions o;
  o.max_steps = 5;
  EXPECT_THROW(integrate_dop853(harmonic(), 0.0, vec({0.0, 1.0}), 100.0, o), StiffnessError);
}
