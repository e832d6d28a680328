#include <array>
#include <cmath>

#include <benchmark/benchmark.h>

#include <gsfcv/calculus.hpp>
#include <gsfcv/dynamics.hpp>
#include <gsfcv/mollifier.hpp>
#include <gsfcv/optctrl.hpp>

using namespace gsfcv;

namespace {

constexpr double kEps = 3.0517578125e-05;

const Mollifier& m4() {
  static const Mollifier m = Mollifier::build(4);
  return m;
}

State vec(std::initializer_list<double> v) {
  State s(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) s[i++] = x;
  return s;
}

void BM_BuildMollifier(benchmark::State& st) {
  const int j = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(Mollifier::build(j));
}
BENCHMARK(BM_BuildMollifier)->Arg(2)->Arg(4)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_HeavisideAt(benchmark::State& st) {
  const auto& m = m4();
  const double b = m.b(kEps);
  double x = -1.0 / b;
  for (auto _ : st) {
    benchmark::DoNotOptimize(heaviside_at(m, kEps, x));
    x = x > 1.0 / b ? -1.0 / b : x + 1e-5;
  }
}
BENCHMARK(BM_HeavisideAt);

void BM_DeltaAt(benchmark::State& st) {
  const auto& m = m4();
  double x = 0.0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(delta_at(m, kEps, x));
    x = x > 5e-3 ? -5e-3 : x + 1e-6;
  }
}
BENCHMARK(BM_DeltaAt);

void BM_IntegrateDelta(benchmark::State& st) {
  const auto g = make_gauge(Gauge::standard());
  const auto d = EmbeddedField(EmbeddedSource::dirac, m4(), g).as_field();
  const std::array<double, 1> layer{0.0};
  for (auto _ : st) benchmark::DoNotOptimize(integrate_1d(d, kEps, -1.0, 1.0, 1e-12, layer));
}
BENCHMARK(BM_IntegrateDelta)->Unit(benchmark::kMicrosecond);

void BM_Trajectory(benchmark::State& st) {
  const auto kind = static_cast<SystemKind>(st.range(0));
  const SystemSpec s(kind, SystemParams{}, m4());
  const State ic = kind == SystemKind::pais_uhlenbeck ? vec({1, 2, 0, 1}) : vec({0, 1});
  const double t2 = kind == SystemKind::pais_uhlenbeck ? 30.0 : 10.0;
  for (auto _ : st) benchmark::DoNotOptimize(integrate(s, kEps, ic, 0.0, t2));
  st.SetLabel(to_string(kind));
}
BENCHMARK(BM_Trajectory)
    ->Arg(static_cast<int>(SystemKind::pendulum))
    ->Arg(static_cast<int>(SystemKind::damped_two_media))
    ->Arg(static_cast<int>(SystemKind::pais_uhlenbeck))
    ->Unit(benchmark::kMillisecond);

ControlProblem lqr() {
  ControlProblem P;
  auto v1 = [](double x) { return Vec::Constant(1, x); };
  auto m1 = [](double x) { return Mat::Constant(1, 1, x); };
  P.L = [](double, const Vec& q, const Vec& u) { return 0.5 * (q[0] * q[0] + u[0] * u[0]); };
  P.dL_dq = [v1](double, const Vec& q, const Vec&) { return v1(q[0]); };
  P.dL_du = [v1](double, const Vec&, const Vec& u) { return v1(u[0]); };
  P.phi = [v1](double, const Vec&, const Vec& u) { return v1(u[0]); };
  P.dphi_dq = [m1](double, const Vec&, const Vec&) { return m1(0.0); };
  P.dphi_du = [m1](double, const Vec&, const Vec&) { return m1(1.0); };
  P.q1 = v1(1.0);
  return P;
}

void BM_SweepLqr(benchmark::State& st) {
  const auto P = lqr();
  const auto u0 = ControlSignal::constant(0, 1, static_cast<std::size_t>(st.range(0)), Vec::Zero(1));
  for (auto _ : st) benchmark::DoNotOptimize(solve_wps(P, u0));
}
BENCHMARK(BM_SweepLqr)->Arg(41)->Arg(201)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
