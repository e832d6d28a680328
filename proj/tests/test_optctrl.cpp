#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include <gsfcv/error.hpp>
#include <gsfcv/optctrl.hpp>

using namespace gsfcv;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }
Mat m1(double x) { return Mat::Constant(1, 1, x); }

// L = 1/2 (q - r)^2 + 1/2 u^2 + c t q, q' = a q + u.
ControlProblem quadratic(double r = 0.0, double a = 0.0, double c = 0.0, double q1 = 1.0) {
  ControlProblem P;
  P.L = [=](double t, const Vec& q, const Vec& u) {
    return 0.5 * (q[0] - r) * (q[0] - r) + 0.5 * u[0] * u[0] + c * t * q[0];
  };
  P.dL_dq = [=](double t, const Vec& q, const Vec&) { return v1(q[0] - r + c * t); };
  P.dL_du = [](double, const Vec&, const Vec& u) { return v1(u[0]); };
  P.dL_dt = [=](double, const Vec& q, const Vec&) { return c * q[0]; };
  P.phi = [=](double, const Vec& q, const Vec& u) { return v1(a * q[0] + u[0]); };
  P.dphi_dq = [=](double, const Vec&, const Vec&) { return m1(a); };
  P.dphi_du = [](double, const Vec&, const Vec&) { return m1(1.0); };
  P.q1 = v1(q1);
  return P;
}

double u_star(double t) { return std::sinh(t - 1) / std::cosh(1.0); }

ControlSignal optimal(std::size_t nodes = 201) {
  return ControlSignal::sample(0, 1, nodes, [](double t) { return v1(u_star(t)); });
}

// Classical RK4 shooting for q'' = q - 1, q(0) = 0, q'(1) = 0. The problem is
// linear, so two shots fix the initial slope.
double shoot_slope() {
  auto end_slope = [](double s) {
    double q = 0.0, v = s;
    const int n = 2000;
    const double h = 1.0 / n;
    for (int i = 0; i < n; ++i) {
      auto f = [](double q, double v) { return std::pair{v, q - 1.0}; };
      auto [k1q, k1v] = f(q, v);
      auto [k2q, k2v] = f(q + h / 2 * k1q, v + h / 2 * k1v);
      auto [k3q, k3v] = f(q + h / 2 * k2q, v + h / 2 * k2v);
      auto [k4q, k4v] = f(q + h * k3q, v + h * k3v);
      q += h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
      v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
    return v;
  };
  const double e0 = end_slope(0.0), e1 = end_slope(1.0);
  return -e0 / (e1 - e0);
}

}  // namespace

TEST(Hamiltonian, LqrToy) {
  const auto P = quadratic();
  const Vec q = v1(0.3), u = v1(-0.4), p = v1(0.7);
  EXPECT_DOUBLE_EQ(hamiltonian(P, 0.2, q, u, p), 0.5 * (0.09 + 0.16) + 0.7 * -0.4);
  EXPECT_DOUBLE_EQ(hamiltonian(P, 0.2, q, u, v1(0.0)), P.L(0.2, q, u));
  EXPECT_DOUBLE_EQ(hamiltonian_du(P, 0.2, q, u, p)[0], -0.4 + 0.7);
}

TEST(ForwardState, Examples) {
  const auto P = quadratic(0, 0, 0, 0);
  const auto fq = forward_state(P, ControlSignal::constant(0, 1, 11, v1(1.0)));
  EXPECT_NEAR(fq.q(0.7)[0], 0.7, 1e-12);

  auto G = quadratic(0, 1.0);
  const auto fg = forward_state(G, ControlSignal::constant(0, 1, 11, v1(0.0)));
  EXPECT_NEAR(fg.q(1.0)[0], std::exp(1.0), 1e-9);

  const auto lq = forward_state(quadratic(), optimal());
  for (double t : {0.0, 0.3, 1.0}) EXPECT_NEAR(lq.q(t)[0], std::cosh(t - 1) / std::cosh(1.0), 1e-8);
  EXPECT_NEAR(lq.cost(), 0.5 * std::tanh(1.0), 1e-8);
}

TEST(AdjointState, LqrOptimum) {
  const auto P = quadratic();
  const auto u = optimal();
  const auto q = forward_state(P, u);
  const auto p = adjoint_state(P, u, q);
  EXPECT_NEAR(p(1.0)[0], 0.0, 1e-12);
  for (double t : {0.0, 0.25, 0.8}) EXPECT_NEAR(p(t)[0], -u_star(t), 1e-8);
}

TEST(AdjointState, VanishesWithoutStateDependence) {
  ControlProblem P = quadratic(0, 0, 0, 0);
  P.L = [](double, const Vec&, const Vec& u) { return 0.5 * u[0] * u[0]; };
  P.dL_dq = [](double, const Vec&, const Vec&) { return v1(0.0); };
  const auto u = ControlSignal::constant(0, 1, 11, v1(0.5));
  const auto p = adjoint_state(P, u, forward_state(P, u));
  EXPECT_EQ(p(0.3)[0], 0.0);
}

TEST(LinearizedState, IntegratesDirection) {
  const auto P = quadratic();
  const auto u = ControlSignal::constant(0, 1, 11, v1(0.2));
  const auto q = forward_state(P, u);
  const auto ubar = ControlSignal::sample(0, 1, 101, [](double t) { return v1(std::cos(t)); });
  EXPECT_NEAR(linearized_state(P, u, q, ubar)(0.9)[0], std::sin(0.9), 1e-8);
  const auto zero = ControlSignal::constant(0, 1, 11, v1(0.0));
  EXPECT_EQ(linearized_state(P, u, q, zero)(0.9)[0], 0.0);
}

TEST(FirstVariation, VanishesAtOptimumAndIsLinear) {
  const auto P = quadratic();
  const auto ub = ControlSignal::sample(0, 1, 101, [](double t) { return v1(std::sin(3 * t)); });
  const auto at_opt = control_first_variation(P, optimal(), ub);
  EXPECT_LE(std::abs(at_opt.via_linearized), 1e-7);
  EXPECT_LE(std::abs(at_opt.via_hamiltonian), 1e-7);

  const auto u = ControlSignal::constant(0, 1, 101, v1(0.3));
  const auto vb = ControlSignal::sample(0, 1, 101, [](double t) { return v1(t * t); });
  const auto a = control_first_variation(P, u, ub), b = control_first_variation(P, u, vb);
  const auto c = control_first_variation(P, u, ub * 2.0 + vb * -0.5);
  EXPECT_NEAR(a.via_linearized, a.via_hamiltonian, 1e-6 * std::abs(a.via_linearized));
  EXPECT_NEAR(c.via_linearized, 2 * a.via_linearized - 0.5 * b.via_linearized, 1e-8 * std::abs(c.via_linearized));
  EXPECT_EQ(control_first_variation(P, u, ControlSignal::constant(0, 1, 101, v1(0.0))).via_hamiltonian, 0.0);

  const double h = 1e-5;
  const double fd = (forward_state(P, u + ub * h).cost() - forward_state(P, u + ub * -h).cost()) / (2 * h);
  EXPECT_NEAR(fd, a.via_hamiltonian, 1e-5 * std::abs(fd));
}

TEST(FirstVariation, BrokenPartialIsDetected) {
  auto P = quadratic();
  P.dL_dq = [](double, const Vec& q, const Vec&) { return v1(3.0 * q[0]); };
  EXPECT_THROW(P.validate_partials(11), ConsistencyError);
  EXPECT_NO_THROW(quadratic().validate_partials(11));
}

TEST(Sweep, LqrConvergesToClosedForm) {
  const auto s = solve_wps(quadratic(), ControlSignal::constant(0, 1, 41, v1(0.0)));
  EXPECT_LE(s.grad_norm, 1e-6);
  EXPECT_LE(s.iteration, 200);
  double err = 0.0;
  for (std::size_t i = 0; i < s.u.nodes(); ++i)
    err = std::max(err, std::abs(s.u.values()[i][0] - u_star(s.u.node_time(i))));
  EXPECT_LE(err, 1e-5);
  EXPECT_NEAR(s.q.q(0.0)[0], 1.0, 1e-12);
  EXPECT_NEAR(s.p(1.0)[0], 0.0, 1e-12);
}

TEST(Sweep, OptimalStartStopsImmediately) {
  const auto s = solve_wps(quadratic(), optimal(41));
  EXPECT_LE(s.iteration, 1);
  EXPECT_LE(s.grad_norm, 1e-6);
}

TEST(Sweep, TrackingMatchesShootingOracle) {
  const auto s = solve_wps(quadratic(1.0, 0.0, 0.0, 0.0), ControlSignal::constant(0, 1, 41, v1(0.0)));
  const double slope = shoot_slope();
  EXPECT_NEAR(s.u.values().front()[0], slope, 1e-5);
  // q' = u and q'' = q - 1 give u(t) = slope cosh t - sinh t.
  for (std::size_t i = 0; i < s.u.nodes(); i += 5) {
    const double t = s.u.node_time(i);
    EXPECT_NEAR(s.u.values()[i][0], slope * std::cosh(t) - std::sinh(t), 1e-5) << t;
  }
}

TEST(Sweep, DivergingStepRaisesStepSizeError) {
  SweepOptions o;
  o.alpha = 3.0;
  o.backtracking = false;
  EXPECT_THROW(solve_wps(quadratic(), ControlSignal::constant(0, 1, 41, v1(0.0)), o), StepSizeError);
}

TEST(TimeIdentity, AutonomousAndTimeDependent) {
  const auto s = solve_wps(quadratic(), ControlSignal::constant(0, 1, 41, v1(0.0)));
  const auto r = hamiltonian_time_identity(quadratic(), s);
  EXPECT_LE(r.max_residual, 1e-5 * r.scale);
  const auto [lo, hi] = std::minmax_element(r.H.begin(), r.H.end());
  EXPECT_LE(*hi - *lo, 1e-5 * std::max(1.0, std::abs(*hi)));

  const auto T = quadratic(0.0, 0.0, 1.0);
  const auto st = solve_wps(T, ControlSignal::constant(0, 1, 41, v1(0.0)));
  const auto rt = hamiltonian_time_identity(T, st);
  EXPECT_LE(rt.max_residual, 1e-5 * rt.scale);
}

TEST(Stability, OrdersOneAndTwo) {
  const auto P = quadratic(0.0, 0.0, 0.0, 1.0);
  ControlProblem N = P;
  N.phi = [](double, const Vec& q, const Vec& u) { return v1(std::sin(q[0]) + u[0]); };
  N.dphi_dq = [](double, const Vec& q, const Vec&) { return m1(std::cos(q[0])); };
  const auto u = ControlSignal::constant(0, 1, 41, v1(0.1));
  const auto ub = ControlSignal::sample(0, 1, 41, [](double t) { return v1(std::cos(2 * t)); });
  const auto r = stability_orders(N, u, ub, {1e-1, 1e-2, 1e-3, 1e-4});
  EXPECT_LE(r.order1_ratio_spread, 1.5);
  EXPECT_GE(r.order2_slope, 1.9);
  const auto lip = lipschitz_constant(N, u, forward_state(N, u));
  EXPECT_LE(lip.L_u, 1.0 + 1e-12);
}

TEST(ControlSignal, SplineAndValidation) {
  const auto s = ControlSignal::sample(0, 2, 21, [](double t) { return v1(t * t * t); });
  EXPECT_NEAR(s(0.55)[0], 0.55 * 0.55 * 0.55, 1e-6);
  EXPECT_THROW(ControlSignal::constant(0, 1, 3, v1(0.0)), ValidationError);
  auto P = quadratic();
  P.t2 = -1.0;
  EXPECT_THROW(P.validate(), ValidationError);
}
