#include "gsfcv_cli/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include <gsfcv/error.hpp>

namespace gsfcv::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Root of g on [lo, hi] given a sign change, to near machine precision.
double bisect(const std::function<double(double)>& g, double lo, double hi) {
  double glo = g(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double layer_variable(const Trajectory& tr, double t) {
  return tr.spec().layers_in_time() ? t : tr.state(t)[0];
}

double nearest_layer(const Trajectory& tr, double x) {
  double best = kNaN, dist = std::numeric_limits<double>::infinity();
  for (double c : tr.spec().layers())
    if (std::abs(x - c) < dist) dist = std::abs(x - c), best = c;
  return best;
}

double relative_spread(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double ref = std::max(std::abs(v.front()), 1e-300);
  return (*hi - *lo) / ref;
}

}  // namespace

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) throw InsufficientDataError("log-log slope needs two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

EnergyDrift energy_drift(const Trajectory& tr) {
  EnergyDrift out;
  const auto& T = tr.times();
  const auto& E = tr.energy();
  if (E.size() != T.size()) throw CapabilityError("trajectory has no energy monitor");
  const double w = 1.0 / tr.b();
  auto far = [&](std::size_t i) {
    return tr.spec().layer_distance(T[i], tr.states()[i][0]) > w;
  };
  std::size_t i = 0;
  const std::size_t n = T.size();
  std::ptrdiff_t last_far = -1;
  while (i < n) {
    if (far(i)) {
      std::vector<double> seg;
      const std::size_t start = i;
      while (i < n && far(i)) seg.push_back(E[i++]);
      if (last_far >= 0 && start > 0)
        out.crossing.push_back(std::abs(E[start] - E[last_far]) /
                               std::max(std::abs(E[last_far]), 1e-300));
      out.far.push_back(relative_spread(seg));
      last_far = static_cast<std::ptrdiff_t>(i - 1);
    } else {
      ++i;
    }
  }
  return out;
}

Transit first_transit(const Trajectory& tr) {
  const auto ev = tr.layer_crossings();
  const double w = 1.0 / tr.b();
  for (std::size_t i = 0; i + 1 < ev.size(); ++i) {
    const double a = ev[i], b = ev[i + 1];
    const double mid = 0.5 * (a + b);
    const double xm = layer_variable(tr, mid);
    const double c = nearest_layer(tr, xm);
    if (!(std::abs(xm - c) < w)) continue;
    const double xa = layer_variable(tr, a) - c;
    const double xb = layer_variable(tr, b) - c;
    if (xa * xb < 0.0) return {true, a, b};
  }
  return {};
}

double peak_highest_derivative(const Trajectory& tr, const Transit& w,
                               std::size_t samples) {
  if (!w.found) return kNaN;
  const int n = tr.spec().order();
  double peak = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = w.entry + (w.exit - w.entry) * static_cast<double>(i) /
                                   static_cast<double>(samples - 1);
    peak = std::max(peak, std::abs(tr.derivative(t, n)));
  }
  return peak;
}

std::vector<JumpSample> damped_jumps(const Trajectory& tr, double min_speed) {
  const auto& s = tr.spec();
  if (s.kind() != SystemKind::damped_two_media)
    throw CapabilityError("jump extraction needs the damped system");
  const auto& p = s.params();
  const double eps = tr.eps();
  const double b = tr.b();
  const double t1 = tr.t1(), t2 = tr.t2();
  const double period = 2.0 * std::numbers::pi * std::sqrt(p.Lambda / p.g);
  auto th = [&](double t) { return tr.state(t)[0]; };
  auto acc = [&](double t) {
    const State y = tr.state(t);
    return damped_rhs(s, eps, t, y[0], y[1]);
  };

  std::vector<JumpSample> out;
  const auto& T = tr.times();
  for (std::size_t i = 1; i < T.size(); ++i) {
    for (double c : s.layers()) {
      const double f0 = th(T[i - 1]) - c, f1 = th(T[i]) - c;
      if (f0 * f1 > 0.0 || f0 == f1) continue;
      const double tc = bisect([&](double t) { return th(t) - c; }, T[i - 1], T[i]);
      const double v = tr.state(tc)[1];
      if (std::abs(v) < min_speed) continue;
      const double W = 4.0 / (b * std::abs(v));
      // Edge where |theta - c| first reaches 1/b on the given side.
      auto edge = [&](double dir, double& te) {
        const double far = tc + dir * W;
        if (far < t1 || far > t2) return false;
        if (std::abs(th(far) - c) < 1.0 / b) return false;
        te = bisect([&](double t) { return std::abs(th(t) - c) - 1.0 / b; }, tc, far);
        const double t_out = te + 2.0 * (te - tc);
        if (t_out < t1 || t_out > t2) return false;
        return std::abs(th(t_out) - c) >= 1.0 / b &&
               (th(t_out) - c) * (th(te) - c) > 0.0;
      };
      double tm = 0.0, tp = 0.0;
      if (!edge(-1.0, tm) || !edge(1.0, tp)) continue;
      auto extrapolate = [&](double te) {
        const double d = te - tc;
        return 3.0 * acc(te) - 3.0 * acc(te + d) + acc(te + 2.0 * d);
      };
      const bool inner_before = std::abs(th(tm)) < p.theta0;
      const double before = extrapolate(tm), after = extrapolate(tp);
      const double raw = acc(tp) - acc(tm);
      JumpSample js;
      js.t = tc;
      js.dtheta = v;
      js.expected = -2.0 * (p.beta2 - p.beta1) * v;
      js.extrapolated = inner_before ? before - after : after - before;
      js.raw = inner_before ? -raw : raw;
      js.resolved = 2.0 / (b * std::abs(v)) <= period / 40.0;
      out.push_back(js);
    }
  }
  return out;
}

std::vector<Peak> amplitude_peaks(const Trajectory& tr) {
  std::vector<Peak> out;
  const auto& T = tr.times();
  const auto& S = tr.states();
  for (std::size_t i = 1; i < T.size(); ++i) {
    const double v0 = S[i - 1][1], v1 = S[i][1];
    if (v0 == 0.0 || v0 * v1 > 0.0) continue;
    const double tp = bisect([&](double t) { return tr.state(t)[1]; }, T[i - 1], T[i]);
    out.push_back({tp, std::abs(tr.state(tp)[0])});
  }
  return out;
}

PuSides pu_sides(const Trajectory& tr) {
  const auto& s = tr.spec();
  if (s.kind() != SystemKind::pais_uhlenbeck)
    throw CapabilityError("side-wise fit needs the Pais-Uhlenbeck system");
  const double eps = tr.eps();
  const double ts = s.params().ts;
  PuSides r;
  r.delta = 4.0 / tr.b();
  auto anchor = [&](double t0) {
    const State y = tr.state(t0);
    const PuFrequencies f = pu_frequencies(s, eps, t0);
    return pu_analytic(f.w1, f.w2, {y[0], y[1], y[2], y[3]}, t0);
  };
  const double end_before = ts - r.delta, begin_after = ts + r.delta;
  r.before = anchor(tr.t1());
  r.after = anchor(begin_after);
  r.fit_error_before = r.fit_error_after = 0.0;
  std::vector<double> Eb, Ea;
  const auto& T = tr.times();
  for (std::size_t i = 0; i < T.size(); ++i) {
    const double t = T[i], q = tr.states()[i][0];
    if (t <= end_before) {
      r.fit_error_before = std::max(r.fit_error_before, std::abs(q - r.before(t)));
      Eb.push_back(tr.energy()[i]);
    } else if (t >= begin_after) {
      r.fit_error_after = std::max(r.fit_error_after, std::abs(q - r.after(t)));
      Ea.push_back(tr.energy()[i]);
    }
  }
  r.drift_before = relative_spread(Eb);
  r.drift_after = relative_spread(Ea);
  r.energy_before = energy(s, eps, tr.state(tr.t1()), tr.t1());
  r.energy_after = energy(s, eps, tr.state(begin_after), begin_after);
  return r;
}

ResidualScan residual_scan(const Trajectory& tr, std::size_t samples) {
  const auto& s = tr.spec();
  const double eps = tr.eps();
  const Lagrangian L = system_lagrangian(s);
  const int m = L.order();
  const Path path = tr.as_path(2 * m);
  const bool damped = s.kind() == SystemKind::damped_two_media;
  const GeneralizedForce Q = damped ? damped_force(s) : GeneralizedForce{};
  const double span = tr.t2() - tr.t1();
  const double h = 1e-3 * span;
  const double margin = 4.0 / tr.b();
  const auto events = tr.layer_crossings();

  ResidualScan out;
  std::vector<double> segment;
  std::ptrdiff_t prev = -2;
  double prev_t = tr.t1();
  auto close_segment = [&] {
    if (segment.size() > 1) {
      const auto [lo, hi] = std::minmax_element(segment.begin(), segment.end());
      double mean = 0.0;
      for (double c : segment) mean += c;
      mean /= static_cast<double>(segment.size());
      out.noether_drift.push_back((*hi - *lo) / std::max(std::abs(mean), 1e-300));
    }
    segment.clear();
  };

  for (std::size_t i = 1; i <= samples; ++i) {
    const double t = tr.t1() + span * static_cast<double>(i) /
                                   static_cast<double>(samples + 1);
    bool near = false;
    for (int j = -8; j <= 8 && !near; ++j) near = path.near_layer(t + j * h, margin);
    if (near) continue;
    ResidualRow row;
    row.t = t;
    row.el = (damped ? dalembert_residual(L, Q, path, eps, t)
                     : el_residual(L, path, eps, t))
                 .cwiseAbs()
                 .maxCoeff();
    row.recurrence = phi_recurrence_residual(L, path, eps, t);
    row.dbr = std::abs(damped ? dbr_residual(L, Q, path, eps, t)
                              : dbr_residual(L, path, eps, t));
    row.noether = damped ? kNaN
                         : noether_constant(L, path, Symmetry::time_translation(1),
                                            eps, t);
    out.scale = std::max(out.scale, std::abs(L(eps, path.jet(t, m))));
    out.max_el = std::max(out.max_el, row.el);
    out.max_recurrence = std::max(out.max_recurrence, row.recurrence);
    out.max_dbr = std::max(out.max_dbr, row.dbr);

    const bool crossed = std::any_of(events.begin(), events.end(), [&](double e) {
      return e > prev_t && e < t;
    });
    if (static_cast<std::ptrdiff_t>(i) != prev + 1 || crossed) close_segment();
    if (!damped) segment.push_back(row.noether);
    prev = static_cast<std::ptrdiff_t>(i);
    prev_t = t;
    out.rows.push_back(row);
  }
  close_segment();
  return out;
}

ControlProblem lqr_problem(double t1, double t2, double q1) {
  ControlProblem P;
  P.L = [](double, const Vec& q, const Vec& u) { return 0.5 * (q.squaredNorm() + u.squaredNorm()); };
  P.dL_dq = [](double, const Vec& q, const Vec&) { return Vec(q); };
  P.dL_du = [](double, const Vec&, const Vec& u) { return Vec(u); };
  P.phi = [](double, const Vec&, const Vec& u) { return Vec(u); };
  P.dphi_dq = [](double, const Vec&, const Vec&) { return Mat(Mat::Zero(1, 1)); };
  P.dphi_du = [](double, const Vec&, const Vec&) { return Mat(Mat::Identity(1, 1)); };
  P.dL_dt = [](double, const Vec&, const Vec&) { return 0.0; };
  P.dphi_dt = [](double, const Vec&, const Vec&) { return Vec(Vec::Zero(1)); };
  P.q1 = Vec::Constant(1, q1);
  P.t1 = t1;
  P.t2 = t2;
  return P;
}

double lqr_optimal_control(double t, double t1, double t2, double q1) {
  return -q1 * std::sinh(t2 - t) / std::cosh(t2 - t1);
}

double lqr_optimal_cost(double t1, double t2, double q1) {
  return 0.5 * q1 * q1 * std::tanh(t2 - t1);
}

ControlProblem nonlinear_test_problem() {
  ControlProblem P;
  P.L = [](double t, const Vec& q, const Vec& u) {
    return 0.5 * (q[0] * q[0] + u[0] * u[0]) + t * q[0];
  };
  P.dL_dq = [](double t, const Vec& q, const Vec&) { return Vec(Vec::Constant(1, q[0] + t)); };
  P.dL_du = [](double, const Vec&, const Vec& u) { return Vec(u); };
  P.phi = [](double, const Vec& q, const Vec& u) {
    return Vec(Vec::Constant(1, std::sin(q[0]) + u[0]));
  };
  P.dphi_dq = [](double, const Vec& q, const Vec&) {
    return Mat(Mat::Constant(1, 1, std::cos(q[0])));
  };
  P.dphi_du = [](double, const Vec&, const Vec&) { return Mat(Mat::Identity(1, 1)); };
  P.dL_dt = [](double, const Vec& q, const Vec&) { return q[0]; };
  P.dphi_dt = [](double, const Vec&, const Vec&) { return Vec(Vec::Zero(1)); };
  P.q1 = Vec::Ones(1);
  P.t1 = 0.0;
  P.t2 = 1.0;
  return P;
}

}  // namespace gsfcv::cli
