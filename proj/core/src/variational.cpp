#include "gsfcv/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "gsfcv/calculus.hpp"
#include "gsfcv/error.hpp"
#include "gsfcv/quadrature.hpp"

namespace gsfcv {

namespace {

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double fd_step(double x) { return 1e-6 * std::max(1.0, std::abs(x)); }

double spacing(const Path& q, const VariationalOptions& o) {
  return o.fd_spacing > 0.0 ? o.fd_spacing : 1e-3 * (q.t2() - q.t1());
}

// Componentwise stencil derivative of a vector-valued function of time.
Eigen::VectorXd dvec(const std::function<Eigen::VectorXd(double)>& g, double t,
                     int order, double h, double lo, double hi, int dim) {
  if (order == 0) return g(t);
  Eigen::VectorXd out(dim);
  for (int c = 0; c < dim; ++c)
    out[c] = stencil_derivative([&](double s) { return g(s)[c]; }, t, order,
                                h, lo, hi);
  return out;
}

void check_compatible(const Lagrangian& L, const Path& q, int need) {
  if (q.dim() != L.dim())
    throw StructuralError("path and Lagrangian dimensions differ");
  if (q.max_order() < need)
    throw CapabilityError("path provides derivatives up to " +
                          std::to_string(q.max_order()) + ", need " +
                          std::to_string(need));
}

}  // namespace

// --- Lagrangian -------------------------------------------------------------

Lagrangian::Lagrangian(int order, int dim, Fn L, Partial partial,
                       TimePartial time_partial, bool autonomous)
    : m_(order), d_(dim), L_(std::move(L)), partial_(std::move(partial)),
      time_partial_(std::move(time_partial)), autonomous_(autonomous) {
  if (m_ < 1) throw ValidationError("Lagrangian order must be >= 1");
  if (d_ < 1) throw ValidationError("Lagrangian dimension must be >= 1");
  if (!L_) throw ValidationError("Lagrangian needs an evaluator");
}

Eigen::VectorXd Lagrangian::partial(double eps, const Jet& j, int i) const {
  if (i < 0 || i > m_) throw ValidationError("partial slot out of range");
  if (partial_) return partial_(eps, j, i);
  Eigen::VectorXd g(d_);
  Jet p = j;
  for (int c = 0; c < d_; ++c) {
    const double x = j.q[i][c];
    const double h = fd_step(x);
    p.q[i][c] = x + h;
    const double fp = L_(eps, p);
    p.q[i][c] = x - h;
    const double fm = L_(eps, p);
    p.q[i][c] = x;
    g[c] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double Lagrangian::time_partial(double eps, const Jet& j) const {
  if (autonomous_) return 0.0;
  if (time_partial_) return time_partial_(eps, j);
  const double h = fd_step(j.t);
  Jet p = j;
  p.t = j.t + h;
  const double fp = L_(eps, p);
  p.t = j.t - h;
  const double fm = L_(eps, p);
  return (fp - fm) / (2.0 * h);
}

void Lagrangian::validate_partials(double eps, std::uint64_t seed, int probes,
                                   double rel_tol, double range) const {
  if (!partial_ && !time_partial_) return;
  std::mt19937_64 rng(seed);
  const Lagrangian fd(m_, d_, L_, {}, {}, autonomous_);
  for (int p = 0; p < probes; ++p) {
    Jet j;
    j.t = range * (2.0 * unit_uniform(rng) - 1.0);
    for (int i = 0; i <= m_; ++i) {
      Eigen::VectorXd v(d_);
      for (int c = 0; c < d_; ++c) v[c] = range * (2.0 * unit_uniform(rng) - 1.0);
      j.q.push_back(v);
    }
    for (int i = 0; i <= m_; ++i) {
      const Eigen::VectorXd a = partial(eps, j, i);
      const Eigen::VectorXd b = fd.partial(eps, j, i);
      for (int c = 0; c < d_; ++c)
        if (std::abs(a[c] - b[c]) > rel_tol * std::max(1.0, std::abs(b[c])))
          throw ConsistencyError("partial d_" + std::to_string(i + 2) +
                                 "L disagrees with finite differences: " +
                                 std::to_string(a[c]) + " vs " +
                                 std::to_string(b[c]));
    }
    if (time_partial_ && !autonomous_) {
      const double a = time_partial(eps, j);
      const double b = fd.time_partial(eps, j);
      if (std::abs(a - b) > rel_tol * std::max(1.0, std::abs(b)))
        throw ConsistencyError("time partial disagrees with finite differences");
    }
  }
}

// --- Path -------------------------------------------------------------------

Path::Path(int dim, int max_order, double t1, double t2, Derivative d)
    : dim_(dim), max_order_(max_order), t1_(t1), t2_(t2), d_(std::move(d)) {
  if (dim_ < 1) throw ValidationError("path dimension must be >= 1");
  if (!(t1_ < t2_)) throw ValidationError("path needs t1 < t2");
  if (!d_) throw ValidationError("path needs an evaluator");
}

Path Path::scalar(double t1, double t2, int max_order,
                  std::function<double(double t, int k)> d) {
  return Path(1, max_order, t1, t2, [d](double t, int k) {
    Eigen::VectorXd v(1);
    v[0] = d(t, k);
    return v;
  });
}

Path Path::perturbed(const Path& q, const Path& h, double s) {
  if (q.dim() != h.dim()) throw StructuralError("perturbation dimension mismatch");
  Path p(q.dim(), std::min(q.max_order(), h.max_order()), q.t1(), q.t2(),
         [q, h, s](double t, int k) -> Eigen::VectorXd { return q(t, k) + s * h(t, k); });
  std::vector<double> bp(q.breakpoints().begin(), q.breakpoints().end());
  bp.insert(bp.end(), h.breakpoints().begin(), h.breakpoints().end());
  p.with_breakpoints(std::move(bp));
  if (q.near_)
    p.with_layer_test(q.near_);
  return p;
}

Eigen::VectorXd Path::operator()(double t, int k) const {
  if (k < 0 || k > max_order_)
    throw CapabilityError("path derivative order " + std::to_string(k) +
                          " not available (max " + std::to_string(max_order_) + ")");
  return d_(t, k);
}

Jet Path::jet(double t, int m) const {
  Jet j;
  j.t = t;
  j.q.reserve(static_cast<std::size_t>(m) + 1);
  for (int k = 0; k <= m; ++k) j.q.push_back((*this)(t, k));
  return j;
}

Path& Path::with_breakpoints(std::vector<double> bp) {
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  bp_ = std::move(bp);
  return *this;
}

Path& Path::with_layer_test(std::function<bool(double, double)> near) {
  near_ = std::move(near);
  return *this;
}

// --- Symmetries -------------------------------------------------------------

Symmetry Symmetry::time_translation(int dim) {
  return {[](double) { return 1.0; },
          [dim](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(dim); },
          "time translation"};
}

Symmetry Symmetry::space_translation(int dim) {
  return {[](double) { return 0.0; },
          [dim](const Eigen::VectorXd&) { return Eigen::VectorXd::Ones(dim); },
          "space translation"};
}

// --- Functionals ------------------------------------------------------------

namespace {

double integrate_path(const std::function<double(double)>& f, const Path& q,
                      double tol) {
  QuadratureOptions qo;
  qo.abs_tol = tol;
  return integrate_adaptive(f, q.t1(), q.t2(), qo, q.breakpoints()).value;
}

void check_boundary(const Path& h, int m) {
  for (int i = 0; i < m; ++i)
    for (double t : {h.t1(), h.t2()})
      if (h(t, i).cwiseAbs().maxCoeff() > 1e-10)
        throw ValidationError("variation direction h^(" + std::to_string(i) +
                              ") does not vanish at t = " + std::to_string(t));
}

}  // namespace

double action(const Lagrangian& L, const Path& q, double eps,
              const VariationalOptions& opts) {
  check_compatible(L, q, L.order());
  const int m = L.order();
  return integrate_path([&](double t) { return L(eps, q.jet(t, m)); }, q,
                        opts.quad_tol);
}

VariationReport first_variation(const Lagrangian& L, const Path& q,
                                const Path& h, double eps,
                                const VariationalOptions& opts) {
  const int m = L.order();
  check_compatible(L, q, m);
  if (h.max_order() < m) throw CapabilityError("direction lacks derivatives");
  check_boundary(h, m);
  const double v = integrate_path(
      [&](double t) {
        const Jet j = q.jet(t, m);
        double acc = 0.0;
        for (int i = 0; i <= m; ++i) acc += L.partial(eps, j, i).dot(h(t, i));
        return acc;
      },
      q, opts.quad_tol);
  return {v, "integral formula", opts.quad_tol};
}

namespace {

// Quadrature tolerance no finer than the rounding noise of a difference
// quotient of J with denominator `denom`.
double difference_tolerance(const Lagrangian& L, const Path& q, double eps,
                            double denom, double requested) {
  const int m = L.order();
  double scale = 0.0;
  for (int i = 0; i <= 16; ++i) {
    const double t = q.t1() + (q.t2() - q.t1()) * i / 16.0;
    scale = std::max(scale, std::abs(L(eps, q.jet(t, m))));
  }
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                       std::max(scale, 1.0) * (q.t2() - q.t1()) / denom;
  return std::max(requested, noise);
}

}  // namespace

VariationReport first_variation_fd(const Lagrangian& L, const Path& q,
                                   const Path& h, double eps, double s,
                                   const VariationalOptions& opts) {
  const int m = L.order();
  check_compatible(L, q, m);
  check_boundary(h, m);
  const Path qp = Path::perturbed(q, h, s), qm = Path::perturbed(q, h, -s);
  const double tol = difference_tolerance(L, q, eps, 2.0 * s, opts.quad_tol);
  const double v = integrate_path(
      [&](double t) {
        return (L(eps, qp.jet(t, m)) - L(eps, qm.jet(t, m))) / (2.0 * s);
      },
      q, tol);
  return {v, "central difference of J, s = " + std::to_string(s), tol};
}

VariationReport second_variation(const Lagrangian& L, const Path& q,
                                 const Path& h, double eps, double s,
                                 const VariationalOptions& opts) {
  const int m = L.order();
  check_compatible(L, q, m);
  check_boundary(h, m);
  const Path qp = Path::perturbed(q, h, s), qm = Path::perturbed(q, h, -s);
  const double tol = difference_tolerance(L, q, eps, s * s, opts.quad_tol);
  const double v = integrate_path(
      [&](double t) {
        return (L(eps, qp.jet(t, m)) - 2.0 * L(eps, q.jet(t, m)) +
                L(eps, qm.jet(t, m))) /
               (s * s);
      },
      q, tol);
  return {v, "second central difference of J, s = " + std::to_string(s), tol};
}

// --- Pointwise identities ---------------------------------------------------

namespace {

// phi^j(t) = sum_{i=0}^{m-j} (-1)^i d^i/dt^i d_{i+j+2}L.
Eigen::VectorXd phi_j(const Lagrangian& L, const Path& q, double eps, double t,
                      int j, double h) {
  const int m = L.order();
  const int d = L.dim();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
  for (int i = 0; i <= m - j; ++i) {
    const int slot = i + j;
    auto g = [&](double s) { return L.partial(eps, q.jet(s, m), slot); };
    const Eigen::VectorXd term = dvec(g, t, i, h, q.t1(), q.t2(), d);
    acc += (i % 2 ? -1.0 : 1.0) * term;
  }
  return acc;
}

}  // namespace

Eigen::VectorXd el_residual(const Lagrangian& L, const Path& q, double eps,
                            double t, const VariationalOptions& opts) {
  check_compatible(L, q, L.order());
  return phi_j(L, q, eps, t, 0, spacing(q, opts));
}

std::vector<Eigen::VectorXd> phi_operators(const Lagrangian& L, const Path& q,
                                           double eps, double t,
                                           const VariationalOptions& opts) {
  check_compatible(L, q, L.order());
  const double h = spacing(q, opts);
  std::vector<Eigen::VectorXd> out;
  for (int j = 0; j <= L.order(); ++j) out.push_back(phi_j(L, q, eps, t, j, h));
  return out;
}

double phi_recurrence_residual(const Lagrangian& L, const Path& q, double eps,
                               double t, const VariationalOptions& opts) {
  check_compatible(L, q, L.order());
  const int m = L.order();
  const double h = spacing(q, opts);
  double worst = 0.0;
  for (int j = 1; j <= m; ++j) {
    auto phi = [&](double s) { return phi_j(L, q, eps, s, j, h); };
    const Eigen::VectorXd dphi = dvec(phi, t, 1, h, q.t1(), q.t2(), L.dim());
    const Eigen::VectorXd rhs =
        L.partial(eps, q.jet(t, m), j - 1) - phi_j(L, q, eps, t, j - 1, h);
    worst = std::max(worst, (dphi - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

namespace {

double energy_like(const Lagrangian& L, const Path& q, double eps, double t,
                   double h) {
  const int m = L.order();
  const Jet jt = q.jet(t, m);
  double v = L(eps, jt);
  for (int j = 1; j <= m; ++j) v -= phi_j(L, q, eps, t, j, h).dot(jt.q[j]);
  return v;
}

}  // namespace

double dbr_residual(const Lagrangian& L, const Path& q, double eps, double t,
                    const VariationalOptions& opts) {
  check_compatible(L, q, L.order());
  const double h = spacing(q, opts);
  const double dC = stencil_derivative(
      [&](double s) { return energy_like(L, q, eps, s, h); }, t, 1, h, q.t1(),
      q.t2());
  return dC - L.time_partial(eps, q.jet(t, L.order()));
}

double dbr_residual(const Lagrangian& L, const GeneralizedForce& Q,
                    const Path& q, double eps, double t,
                    const VariationalOptions& opts) {
  double r = dbr_residual(L, q, eps, t, opts);
  if (Q) r += Q(eps, q.jet(t, L.order())).dot(q(t, 1));
  return r;
}

Eigen::VectorXd dalembert_residual(const Lagrangian& L,
                                   const GeneralizedForce& Q, const Path& q,
                                   double eps, double t,
                                   const VariationalOptions& opts) {
  Eigen::VectorXd r = el_residual(L, q, eps, t, opts);
  if (Q) r += Q(eps, q.jet(t, L.order()));
  return r;
}

double noether_constant(const Lagrangian& L, const Path& q,
                        const Symmetry& sym, double eps, double t,
                        const VariationalOptions& opts) {
  check_compatible(L, q, L.order());
  if (!sym.tau_s || !sym.sigma_s)
    throw ValidationError("symmetry needs both generators");
  const int m = L.order();
  const int d = L.dim();
  const double h = spacing(q, opts);
  // eta^0 = dsigma/ds(q), eta^i = d/dt eta^{i-1} - q^(i) d/dt dtau/ds.
  std::function<Eigen::VectorXd(int, double)> eta = [&](int i, double s) -> Eigen::VectorXd {
    if (i == 0) return sym.sigma_s(q(s, 0));
    const Eigen::VectorXd de = dvec([&](double r) { return eta(i - 1, r); }, s,
                                    1, h, q.t1(), q.t2(), d);
    const double dtau = stencil_derivative(sym.tau_s, s, 1, h, q.t1(), q.t2());
    return de - q(s, i) * dtau;
  };
  const Jet jt = q.jet(t, m);
  double C = 0.0;
  double E = L(eps, jt);
  for (int i = 1; i <= m; ++i) {
    const Eigen::VectorXd ph = phi_j(L, q, eps, t, i, h);
    E -= ph.dot(jt.q[i]);
    const Eigen::VectorXd e = eta(i - 1, t);
    if (e.cwiseAbs().maxCoeff() != 0.0) C += ph.dot(e);
  }
  const double tau = sym.tau_s(t);
  if (tau != 0.0) C += E * tau;
  return C;
}

// --- Test directions --------------------------------------------------------

Path test_direction(double t1, double t2, int k, int m, int max_order) {
  if (!(t1 < t2)) throw ValidationError("test direction needs t1 < t2");
  if (k < 1 || m < 0) throw ValidationError("test direction needs k >= 1, m >= 0");
  const double T = t2 - t1;
  // w(tau) = 4 tau (T - tau) / T^2, polynomial in tau = t - t1.
  std::vector<double> w{0.0, 4.0 / T, -4.0 / (T * T)};
  std::vector<double> W{1.0};
  for (int p = 0; p < m; ++p) {
    std::vector<double> nw(W.size() + 2, 0.0);
    for (std::size_t a = 0; a < W.size(); ++a)
      for (std::size_t b = 0; b < w.size(); ++b) nw[a + b] += W[a] * w[b];
    W = std::move(nw);
  }
  const double om = k * std::numbers::pi / T;
  auto poly_d = [W](double tau, int n) {
    double acc = 0.0;
    for (std::size_t a = static_cast<std::size_t>(n); a < W.size(); ++a) {
      double c = W[a];
      for (int r = 0; r < n; ++r) c *= static_cast<double>(a - r);
      acc += c * std::pow(tau, static_cast<double>(a - n));
    }
    return acc;
  };
  auto d = [=](double t, int n) {
    const double tau = t - t1;
    double acc = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= n; ++j) {
      const double s = std::pow(om, j) * std::sin(om * tau + j * std::numbers::pi / 2);
      acc += binom * s * poly_d(tau, n - j);
      binom = binom * (n - j) / (j + 1);
    }
    return acc;
  };
  return Path::scalar(t1, t2, max_order, d);
}

}  // namespace gsfcv
