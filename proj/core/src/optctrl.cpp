#include "gsfcv/optctrl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/SVD>

#include "gsfcv/calculus.hpp"
#include "gsfcv/error.hpp"
#include "gsfcv/quadrature.hpp"

namespace gsfcv {

namespace {

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double fd_step(double x) { return 1e-6 * std::max(1.0, std::abs(x)); }

bool close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(1.0, std::abs(b));
}

}  // namespace

// --- ControlProblem ---------------------------------------------------------

void ControlProblem::validate() const {
  if (state_dim < 1 || control_dim < 1)
    throw ValidationError("control problem dimensions must be positive");
  if (!L || !dL_dq || !dL_du || !phi || !dphi_dq || !dphi_du)
    throw ValidationError("control problem is missing an evaluator");
  if (q1.size() != state_dim)
    throw ValidationError("initial state has the wrong length");
  if (!q1.allFinite()) throw ValidationError("initial state is not finite");
  if (!(t1 < t2)) throw ValidationError("control problem needs t1 < t2");
  if (!control_box.empty() &&
      control_box.size() != static_cast<std::size_t>(control_dim))
    throw ValidationError("control_box needs one interval per control");
  for (auto [lo, hi] : control_box)
    if (!(lo <= hi)) throw ValidationError("control_box interval is empty");
}

void ControlProblem::validate_partials(std::uint64_t seed, int probes,
                                       double rel_tol, double range) const {
  validate();
  std::mt19937_64 rng(seed);
  auto draw = [&](int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = range * (2.0 * unit_uniform(rng) - 1.0);
    return v;
  };
  for (int k = 0; k < probes; ++k) {
    const double t = t1 + (t2 - t1) * unit_uniform(rng);
    Vec q = draw(state_dim), u = draw(control_dim);
    const Vec gq = dL_dq(t, q, u), gu = dL_du(t, q, u);
    const Mat Jq = dphi_dq(t, q, u), Ju = dphi_du(t, q, u);
    if (gq.size() != state_dim || gu.size() != control_dim ||
        Jq.rows() != state_dim || Jq.cols() != state_dim ||
        Ju.rows() != state_dim || Ju.cols() != control_dim)
      throw ValidationError("partial derivative has the wrong shape");
    for (int i = 0; i < state_dim; ++i) {
      const double h = fd_step(q[i]);
      Vec qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const double fd = (L(t, qp, u) - L(t, qm, u)) / (2.0 * h);
      if (!close(gq[i], fd, rel_tol))
        throw ConsistencyError("dL/dq disagrees with finite differences");
      const Vec col = (phi(t, qp, u) - phi(t, qm, u)) / (2.0 * h);
      for (int r = 0; r < state_dim; ++r)
        if (!close(Jq(r, i), col[r], rel_tol))
          throw ConsistencyError("dphi/dq disagrees with finite differences");
    }
    for (int i = 0; i < control_dim; ++i) {
      const double h = fd_step(u[i]);
      Vec up = u, um = u;
      up[i] += h;
      um[i] -= h;
      const double fd = (L(t, q, up) - L(t, q, um)) / (2.0 * h);
      if (!close(gu[i], fd, rel_tol))
        throw ConsistencyError("dL/du disagrees with finite differences");
      const Vec col = (phi(t, q, up) - phi(t, q, um)) / (2.0 * h);
      for (int r = 0; r < state_dim; ++r)
        if (!close(Ju(r, i), col[r], rel_tol))
          throw ConsistencyError("dphi/du disagrees with finite differences");
    }
  }
}

// --- ControlSignal ----------------------------------------------------------

ControlSignal::ControlSignal(double t1, double t2, std::vector<Vec> values)
    : t1_(t1), t2_(t2), values_(std::move(values)) {
  if (!(t1_ < t2_)) throw ValidationError("control signal needs t1 < t2");
  if (values_.size() < 5)
    throw ValidationError("control signal needs at least 5 nodes");
  const auto d = values_.front().size();
  for (const auto& v : values_)
    if (v.size() != d || !v.allFinite())
      throw ValidationError("control values must be finite with a common size");
  h_ = (t2_ - t1_) / static_cast<double>(values_.size() - 1);
  build();
}

ControlSignal ControlSignal::constant(double t1, double t2, std::size_t nodes,
                                      const Vec& value) {
  return ControlSignal(t1, t2, std::vector<Vec>(nodes, value));
}

ControlSignal ControlSignal::sample(double t1, double t2, std::size_t nodes,
                                    const std::function<Vec(double)>& f) {
  if (nodes < 5) throw ValidationError("control signal needs at least 5 nodes");
  std::vector<Vec> v;
  v.reserve(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double t = i + 1 == nodes ? t2
                                    : t1 + (t2 - t1) * static_cast<double>(i) /
                                               static_cast<double>(nodes - 1);
    v.push_back(f(t));
  }
  return ControlSignal(t1, t2, std::move(v));
}

double ControlSignal::node_time(std::size_t i) const {
  if (i + 1 == values_.size()) return t2_;
  return t1_ + static_cast<double>(i) * h_;
}

void ControlSignal::build() {
  const std::size_t n = values_.size();
  const auto& y = values_;
  slopes_.assign(n, Vec::Zero(y[0].size()));
  slopes_[0] = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) /
               (12.0 * h_);
  slopes_[n - 1] = (25.0 * y[n - 1] - 48.0 * y[n - 2] + 36.0 * y[n - 3] -
                    16.0 * y[n - 4] + 3.0 * y[n - 5]) /
                   (12.0 * h_);
  if (n == 2) return;
  // m_{i-1} + 4 m_i + m_{i+1} = 3 (y_{i+1} - y_{i-1}) / h, Thomas algorithm.
  const std::size_t k = n - 2;
  std::vector<double> cp(k);
  std::vector<Vec> dp(k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t i = j + 1;
    Vec r = 3.0 * (y[i + 1] - y[i - 1]) / h_;
    if (j == 0) r -= slopes_[0];
    if (j + 1 == k) r -= slopes_[n - 1];
    const double denom = 4.0 - (j == 0 ? 0.0 : cp[j - 1]);
    cp[j] = 1.0 / denom;
    dp[j] = (r - (j == 0 ? Vec::Zero(r.size()) : dp[j - 1])) / denom;
  }
  slopes_[k] = dp[k - 1];
  for (std::size_t j = k - 1; j-- > 0;)
    slopes_[j + 1] = dp[j] - cp[j] * slopes_[j + 2];
}

Vec ControlSignal::operator()(double t) const {
  const std::size_t n = values_.size();
  double pos = (t - t1_) / h_;
  pos = std::clamp(pos, 0.0, static_cast<double>(n - 1));
  std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= n) i = n - 2;
  const double s = pos - static_cast<double>(i);
  const double s2 = s * s, s3 = s2 * s;
  return (2.0 * s3 - 3.0 * s2 + 1.0) * values_[i] +
         (s3 - 2.0 * s2 + s) * h_ * slopes_[i] +
         (-2.0 * s3 + 3.0 * s2) * values_[i + 1] + (s3 - s2) * h_ * slopes_[i + 1];
}

ControlSignal ControlSignal::operator+(const ControlSignal& o) const {
  if (o.values_.size() != values_.size() || o.t1_ != t1_ || o.t2_ != t2_)
    throw StructuralError("control signals live on different grids");
  std::vector<Vec> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[i] + o.values_[i];
  return ControlSignal(t1_, t2_, std::move(v));
}

ControlSignal ControlSignal::operator*(double s) const {
  std::vector<Vec> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = s * values_[i];
  return ControlSignal(t1_, t2_, std::move(v));
}

// --- Hamiltonian ------------------------------------------------------------

double hamiltonian(const ControlProblem& P, double t, const Vec& q,
                   const Vec& u, const Vec& p) {
  return P.L(t, q, u) + p.dot(P.phi(t, q, u));
}

Vec hamiltonian_du(const ControlProblem& P, double t, const Vec& q,
                   const Vec& u, const Vec& p) {
  return P.dL_du(t, q, u) + P.dphi_du(t, q, u).transpose() * p;
}

double hamiltonian_dt(const ControlProblem& P, double t, const Vec& q,
                      const Vec& u, const Vec& p) {
  const double h = fd_step(t);
  const double Lt = P.dL_dt ? P.dL_dt(t, q, u)
                            : (P.L(t + h, q, u) - P.L(t - h, q, u)) / (2.0 * h);
  const Vec ft = P.dphi_dt ? P.dphi_dt(t, q, u)
                           : Vec((P.phi(t + h, q, u) - P.phi(t - h, q, u)) / (2.0 * h));
  return Lt + p.dot(ft);
}

// --- Cauchy problems --------------------------------------------------------

namespace {

OdeOptions ode_options(const SolveTolerances& tol) {
  OdeOptions o;
  o.rtol = tol.tol;
  o.atol = tol.tol;
  return o;
}

void check_signal(const ControlProblem& P, const ControlSignal& u) {
  if (u.dim() != P.control_dim)
    throw StructuralError("control signal dimension mismatch");
  if (u.t1() != P.t1 || u.t2() != P.t2)
    throw StructuralError("control signal interval differs from the problem");
}

}  // namespace

ForwardSolution forward_state(const ControlProblem& P, const ControlSignal& u,
                              const SolveTolerances& tol) {
  P.validate();
  check_signal(P, u);
  const int n = P.state_dim;
  OdeRhs f = [&](double t, const State& y, State& dy) {
    const Vec q = y.head(n);
    const Vec ut = u(t);
    dy.head(n) = P.phi(t, q, ut);
    dy[n] = P.L(t, q, ut);
  };
  State y0(n + 1);
  y0.head(n) = P.q1;
  y0[n] = 0.0;
  return {integrate_dop853(f, P.t1, y0, P.t2, ode_options(tol)), n};
}

DenseSolution adjoint_state(const ControlProblem& P, const ControlSignal& u,
                            const ForwardSolution& q,
                            const SolveTolerances& tol) {
  check_signal(P, u);
  const int n = P.state_dim;
  OdeRhs f = [&](double t, const State& p, State& dp) {
    const Vec qt = q.q(t);
    const Vec ut = u(t);
    dp = -P.dL_dq(t, qt, ut) - P.dphi_dq(t, qt, ut).transpose() * p;
  };
  return integrate_dop853(f, P.t2, State::Zero(n), P.t1, ode_options(tol));
}

DenseSolution linearized_state(const ControlProblem& P, const ControlSignal& u,
                               const ForwardSolution& q,
                               const ControlSignal& ubar,
                               const SolveTolerances& tol) {
  check_signal(P, u);
  check_signal(P, ubar);
  const int n = P.state_dim;
  OdeRhs f = [&](double t, const State& y, State& dy) {
    const Vec qt = q.q(t);
    const Vec ut = u(t);
    dy = P.dphi_dq(t, qt, ut) * y + P.dphi_du(t, qt, ut) * ubar(t);
  };
  return integrate_dop853(f, P.t1, State::Zero(n), P.t2, ode_options(tol));
}

namespace {

double integrate_on_nodes(const std::function<double(double)>& f,
                          const ControlSignal& u) {
  std::vector<double> bp;
  bp.reserve(u.nodes());
  for (std::size_t i = 1; i + 1 < u.nodes(); ++i) bp.push_back(u.node_time(i));
  QuadratureOptions qo;
  qo.abs_tol = 1e-13;
  qo.max_panels = 400000;
  return integrate_adaptive(f, u.t1(), u.t2(), qo, bp).value;
}

}  // namespace

FirstVariation control_first_variation(const ControlProblem& P,
                                       const ControlSignal& u,
                                       const ControlSignal& ubar,
                                       const SolveTolerances& tol) {
  const ForwardSolution q = forward_state(P, u, tol);
  const DenseSolution p = adjoint_state(P, u, q, tol);
  const DenseSolution qbar = linearized_state(P, u, q, ubar, tol);
  const double a = integrate_on_nodes(
      [&](double t) {
        const Vec qt = q.q(t), ut = u(t), ub = ubar(t);
        return P.dL_dq(t, qt, ut).dot(qbar(t)) + P.dL_du(t, qt, ut).dot(ub);
      },
      u);
  const double b = integrate_on_nodes(
      [&](double t) {
        return hamiltonian_du(P, t, q.q(t), u(t), p(t)).dot(ubar(t));
      },
      u);
  if (std::abs(a - b) > 1e-4 * std::max(std::abs(a), std::abs(b)) + 1e-9)
    throw ConsistencyError("first variation disagrees between the linearized "
                           "and adjoint forms: " +
                           std::to_string(a) + " vs " + std::to_string(b));
  return {a, b};
}

// --- Sweep ------------------------------------------------------------------

SweepState solve_wps(const ControlProblem& P, const ControlSignal& u0,
                     const SweepOptions& opts) {
  P.validate();
  check_signal(P, u0);
  if (!(opts.alpha > 0.0)) throw ValidationError("sweep step alpha must be positive");
  if (!P.control_box.empty())
    for (const auto& v : u0.values())
      for (int c = 0; c < P.control_dim; ++c)
        if (v[c] < P.control_box[c].first || v[c] > P.control_box[c].second)
          throw ValidationError("initial control leaves the control box");

  ControlSignal u = u0;
  ForwardSolution fw = forward_state(P, u, opts.tol);
  double cost = fw.cost();
  double alpha = opts.alpha;
  int stalled = 0;
  std::vector<double> history{cost};
  for (int iter = 0;; ++iter) {
    DenseSolution p = adjoint_state(P, u, fw, opts.tol);
    std::vector<Vec> g(u.nodes());
    double gn = 0.0;
    for (std::size_t i = 0; i < u.nodes(); ++i) {
      const double t = u.node_time(i);
      g[i] = hamiltonian_du(P, t, fw.q(t), u.values()[i], p(t));
      gn = std::max(gn, g[i].cwiseAbs().maxCoeff());
    }
    if (gn <= opts.grad_tol || iter >= opts.max_iter)
      return {u, fw, p, gn, cost, iter, alpha, history};

    const double slack = 10.0 * opts.tol.tol * (1.0 + std::abs(cost));
    while (true) {
      std::vector<Vec> v(u.nodes());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = u.values()[i] - alpha * g[i];
      ControlSignal un(u.t1(), u.t2(), std::move(v));
      ForwardSolution fn = forward_state(P, un, opts.tol);
      const double cn = fn.cost();
      const bool decreased = cn <= cost + slack;
      if (!decreased) {
        if (++stalled >= 10)
          throw StepSizeError("cost did not decrease for 10 consecutive "
                              "iterations; try a smaller alpha (now " +
                              std::to_string(alpha) + ")");
        if (opts.backtracking) {
          alpha *= 0.5;
          continue;
        }
      } else {
        stalled = 0;
      }
      u = std::move(un);
      fw = std::move(fn);
      cost = cn;
      history.push_back(cost);
      break;
    }
  }
}

TimeIdentityReport hamiltonian_time_identity(const ControlProblem& P,
                                             const SweepState& s,
                                             std::size_t samples) {
  if (samples < 2) samples = 2;
  const double t1 = P.t1, t2 = P.t2;
  const double h = 1e-3 * (t2 - t1);
  auto H = [&](double t) {
    return hamiltonian(P, t, s.q.q(t), s.u(t), s.p(t));
  };
  TimeIdentityReport r;
  r.max_residual = 0.0;
  double hmax = 0.0, htmax = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = i + 1 == samples
                         ? t2
                         : t1 + (t2 - t1) * static_cast<double>(i) /
                                    static_cast<double>(samples - 1);
    const double dH = stencil_derivative(H, t, 1, h, t1, t2);
    const double Ht = hamiltonian_dt(P, t, s.q.q(t), s.u(t), s.p(t));
    const double res = std::abs(dH - Ht);
    r.times.push_back(t);
    r.residual.push_back(res);
    r.H.push_back(H(t));
    r.max_residual = std::max(r.max_residual, res);
    hmax = std::max(hmax, std::abs(r.H.back()));
    htmax = std::max(htmax, std::abs(Ht));
  }
  r.scale = std::max(1.0, hmax + (t2 - t1) * htmax);
  return r;
}

StabilityReport stability_orders(const ControlProblem& P,
                                 const ControlSignal& u,
                                 const ControlSignal& ubar,
                                 const std::vector<double>& hs,
                                 const SolveTolerances& tol,
                                 std::size_t samples) {
  if (hs.size() < 2) throw ValidationError("stability check needs >= 2 steps");
  const ForwardSolution q = forward_state(P, u, tol);
  const DenseSolution qbar = linearized_state(P, u, q, ubar, tol);
  StabilityReport r;
  r.h = hs;
  for (double h : hs) {
    if (!(h > 0.0)) throw ValidationError("stability steps must be positive");
    const ForwardSolution qh = forward_state(P, u + ubar * h, tol);
    double n1 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
      const double t = P.t1 + (P.t2 - P.t1) * static_cast<double>(i) /
                                  static_cast<double>(samples - 1);
      const Vec d = qh.q(t) - q.q(t);
      n1 = std::max(n1, d.cwiseAbs().maxCoeff());
      n2 = std::max(n2, (d - h * qbar(t)).cwiseAbs().maxCoeff());
    }
    r.order1.push_back(n1);
    r.order2.push_back(n2);
  }
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double ratio = r.order1[i] / hs[i];
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
  }
  r.order1_ratio_spread = rmin > 0.0 ? rmax / rmin
                                     : std::numeric_limits<double>::infinity();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double x = std::log(hs[i]);
    const double y = std::log(std::max(r.order2[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  r.order2_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return r;
}

LipschitzReport lipschitz_constant(const ControlProblem& P,
                                   const ControlSignal& u,
                                   const ForwardSolution& q,
                                   std::size_t samples) {
  double L = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = P.t1 + (P.t2 - P.t1) * static_cast<double>(i) /
                                static_cast<double>(std::max<std::size_t>(samples - 1, 1));
    const Mat J = P.dphi_dq(t, q.q(t), u(t));
    Eigen::JacobiSVD<Mat> svd(J);
    L = std::max(L, svd.singularValues()(0));
  }
  return {L, (P.t2 - P.t1) * L >= 1.0};
}

}  // namespace gsfcv
