#include "gsfcv/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gsfcv/error.hpp"
#include "gsfcv/quadrature.hpp"

namespace gsfcv {

namespace {

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Finite-difference directional derivative along v, step h.
double fd_directional(const GsfField& f, double eps, std::span<const double> x,
                      std::span<const double> v, int order, double h) {
  std::vector<double> y(x.begin(), x.end());
  auto at = [&](double s) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + s * v[i];
    return f(eps, y);
  };
  return central_difference(at, 0.0, order, h);
}

double golden_max(const std::function<double(double)>& g, double lo,
                  double hi) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < 80 && b - a > 1e-13 * (1.0 + std::abs(a)); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = g(x1);
    }
  }
  return std::max(f1, f2);
}

}  // namespace

double central_difference(const std::function<double(double)>& g, double x,
                          int order, double h) {
  if (order == 0) return g(x);
  if (order == 1) return (g(x + h) - g(x - h)) / (2.0 * h);
  // Plain central stencil of order k with half-integer offsets when k is odd.
  double acc = 0.0;
  for (int j = 0; j <= order; ++j) {
    const double off = (0.5 * order - j) * h;
    acc += ((j % 2) ? -1.0 : 1.0) * binom(order, j) * g(x + off);
  }
  return acc / std::pow(h, order);
}

double stencil_derivative(const std::function<double(double)>& g, double t,
                          int order, double h, double lo, double hi) {
  if (order < 0) throw ValidationError("negative derivative order");
  if (order == 0) return g(t);
  if (!(h > 0.0)) throw ValidationError("stencil spacing must be positive");
  const int half = (order + 1) / 2 + 1;
  const int npts = 2 * half + 1;
  if (hi - lo < (npts - 1) * h)
    throw ValidationError("interval too short for the derivative stencil");
  // Integer offsets, shifted so that every node stays inside [lo, hi].
  int shift = 0;
  const double slack = 1e-12 * (1.0 + std::abs(t));
  while (t + (shift - half) * h < lo - slack) ++shift;
  while (t + (shift + half) * h > hi + slack) --shift;
  std::vector<double> x(npts);
  for (int i = 0; i < npts; ++i) x[i] = static_cast<double>(shift - half + i);

  // Fornberg weights at z = 0 for unit spacing.
  const int M = order;
  std::vector<std::vector<double>> c(npts, std::vector<double>(M + 1, 0.0));
  double c1 = 1.0, c4 = x[0];
  c[0][0] = 1.0;
  for (int i = 1; i < npts; ++i) {
    const int mn = std::min(i, M);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  double acc = 0.0;
  for (int i = 0; i < npts; ++i)
    if (c[i][M] != 0.0) acc += c[i][M] * g(t + x[i] * h);
  return acc / std::pow(h, order);
}

GsfField::GsfField(std::size_t dim, Value value, int max_order,
                   Directional directional)
    : dim_(dim), value_(std::move(value)), max_order_(max_order),
      directional_(std::move(directional)) {
  if (dim_ == 0) throw ValidationError("field dimension must be positive");
  if (!value_) throw ValidationError("field needs an evaluator");
  if (max_order_ < 0) throw ValidationError("max derivative order must be >= 0");
}

GsfField GsfField::univariate(Univariate f, UnivariateDerivative df,
                              int max_order) {
  Value v = [f](double eps, std::span<const double> x) { return f(eps, x[0]); };
  Directional d = [f, df](double eps, std::span<const double> x,
                          std::span<const double> dir, int order) {
    if (order == 0) return f(eps, x[0]);
    return df(eps, x[0], order) * std::pow(dir[0], order);
  };
  return GsfField(1, std::move(v), max_order, std::move(d));
}

GsfField GsfField::univariate_fd(Univariate f, int max_order) {
  Value v = [f](double eps, std::span<const double> x) { return f(eps, x[0]); };
  return GsfField(1, std::move(v), max_order);
}

GsfField& GsfField::with_layers(std::vector<double> points,
                                std::function<double(double)> halfwidth) {
  layers_ = std::move(points);
  std::sort(layers_.begin(), layers_.end());
  halfwidth_ = std::move(halfwidth);
  return *this;
}

bool GsfField::near_layer(double eps, double x) const {
  if (layers_.empty() || !halfwidth_) return false;
  const double w = 2.0 * halfwidth_(eps);
  return std::any_of(layers_.begin(), layers_.end(),
                     [&](double c) { return std::abs(x - c) <= w; });
}

namespace {

std::vector<double> merged_layers(const GsfField& f, const GsfField& g) {
  std::vector<double> l(f.layers().begin(), f.layers().end());
  l.insert(l.end(), g.layers().begin(), g.layers().end());
  return l;
}

std::function<double(double)> merged_width(const GsfField& f,
                                           const GsfField& g) {
  return [f, g](double eps) {
    return std::max(f.layer_halfwidth(eps), g.layer_halfwidth(eps));
  };
}

void check_same_dim(const GsfField& f, const GsfField& g) {
  if (f.dim() != g.dim())
    throw StructuralError("fields have different dimensions");
}

}  // namespace

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

bool both_analytic(const GsfField& f, const GsfField& g) {
  return f.mode() == DerivativeMode::analytic && g.mode() == DerivativeMode::analytic;
}

}  // namespace

GsfField sum(const GsfField& f, const GsfField& g) {
  check_same_dim(f, g);
  GsfField::Directional d;
  if (both_analytic(f, g))
    d = [f, g](double eps, std::span<const double> x, std::span<const double> v, int k) {
      return f.directional()(eps, x, v, k) + g.directional()(eps, x, v, k);
    };
  GsfField r(f.dim(),
             [f, g](double eps, std::span<const double> x) {
               return f(eps, x) + g(eps, x);
             },
             std::min(f.max_derivative_order(), g.max_derivative_order()), d);
  r.with_layers(merged_layers(f, g), merged_width(f, g));
  return r;
}

GsfField product(const GsfField& f, const GsfField& g) {
  check_same_dim(f, g);
  GsfField::Directional d;
  if (both_analytic(f, g))
    d = [f, g](double eps, std::span<const double> x, std::span<const double> v, int n) {
      // Leibniz rule along the line x + s v.
      double acc = 0.0;
      for (int k = 0; k <= n; ++k) {
        const double fk = k == 0 ? f(eps, x) : f.directional()(eps, x, v, k);
        const double gk = n - k == 0 ? g(eps, x) : g.directional()(eps, x, v, n - k);
        acc += binomial(n, k) * fk * gk;
      }
      return acc;
    };
  GsfField r(f.dim(),
             [f, g](double eps, std::span<const double> x) {
               return f(eps, x) * g(eps, x);
             },
             std::min(f.max_derivative_order(), g.max_derivative_order()), d);
  r.with_layers(merged_layers(f, g), merged_width(f, g));
  return r;
}

GsfField compose(const GsfField& f, const GsfField& g) {
  if (f.dim() != 1 || g.dim() != 1)
    throw StructuralError("compose expects univariate fields");
  GsfField::Directional d;
  if (both_analytic(f, g))
    d = [f, g](double eps, std::span<const double> x, std::span<const double> v, int n) {
      // Faa di Bruno: sum_k f^(k)(g) B_{n,k}(g', ..., g^(n-k+1)) with the
      // partial Bell polynomials built by their standard recurrence.
      std::vector<double> dg(n + 1, 0.0);
      for (int i = 1; i <= n; ++i) dg[i] = g.directional()(eps, x, v, i);
      std::vector<std::vector<double>> B(n + 1, std::vector<double>(n + 1, 0.0));
      B[0][0] = 1.0;
      for (int m = 1; m <= n; ++m)
        for (int k = 1; k <= m; ++k)
          for (int i = 1; i <= m - k + 1; ++i)
            B[m][k] += binomial(m - 1, i - 1) * dg[i] * B[m - i][k - 1];
      const double y = g(eps, x);
      const double one = 1.0;
      double acc = 0.0;
      for (int k = 1; k <= n; ++k)
        acc += f.directional()(eps, std::span<const double>(&y, 1),
                               std::span<const double>(&one, 1), k) * B[n][k];
      return acc;
    };
  return GsfField(1,
                  [f, g](double eps, std::span<const double> x) {
                    return f(eps, g(eps, x));
                  },
                  std::min(f.max_derivative_order(), g.max_derivative_order()), d);
}

GsfField scaled(const GsfField& f, double c) {
  GsfField::Directional d;
  if (f.mode() == DerivativeMode::analytic)
    d = [f, c](double eps, std::span<const double> x, std::span<const double> v, int k) {
      return c * f.directional()(eps, x, v, k);
    };
  GsfField r(f.dim(),
             [f, c](double eps, std::span<const double> x) {
               return c * f(eps, x);
             },
             f.max_derivative_order(), d);
  if (!f.layers().empty())
    r.with_layers({f.layers().begin(), f.layers().end()},
                  [f](double eps) { return f.layer_halfwidth(eps); });
  return r;
}

double gsf_derivative(const GsfField& f, double eps, std::span<const double> x,
                      std::span<const double> direction, int order) {
  if (order < 0 || order > f.max_derivative_order())
    throw CapabilityError("derivative order " + std::to_string(order) +
                          " exceeds the field's declared maximum " +
                          std::to_string(f.max_derivative_order()));
  if (x.size() != f.dim() || direction.size() != f.dim())
    throw StructuralError("point/direction dimension mismatch");
  if (order == 0) return f(eps, x);
  if (f.mode() == DerivativeMode::analytic)
    return f.directional()(eps, x, direction, order);
  double scale = 1.0;
  for (double xi : x) scale = std::max(scale, std::abs(xi));
  const double h = std::pow(std::numeric_limits<double>::epsilon(),
                            1.0 / (order + 2)) * scale;
  return fd_directional(f, eps, x, direction, order, h);
}

double gsf_derivative(const GsfField& f, double eps, double x, int order) {
  const double one = 1.0;
  return gsf_derivative(f, eps, std::span<const double>(&x, 1),
                        std::span<const double>(&one, 1), order);
}

double integrate_1d(const GsfField& f, double eps, double a, double b,
                    double tol, std::span<const double> extra_breakpoints) {
  if (!(a <= b)) throw ValidationError("integrate_1d expects a <= b");
  if (f.dim() != 1) throw StructuralError("integrate_1d expects a 1-D field");
  std::vector<double> bp(extra_breakpoints.begin(), extra_breakpoints.end());
  const double w = f.layer_halfwidth(eps);
  for (double c : f.layers()) {
    bp.push_back(c);
    if (w > 0.0) {
      bp.push_back(c - w);
      bp.push_back(c + w);
    }
  }
  std::sort(bp.begin(), bp.end());
  QuadratureOptions qo;
  qo.abs_tol = tol;
  return integrate_adaptive([&](double x) { return f(eps, x); }, a, b, qo, bp)
      .value;
}

GradedNorm graded_norm(const GsfField& f, const GaugePtr& gauge, int l,
                       const std::function<Interval(double eps)>& domain,
                       std::size_t nodes) {
  if (l < 0 || l > f.max_derivative_order())
    throw CapabilityError("graded norm order exceeds field derivative order");
  if (f.dim() != 1) throw StructuralError("graded_norm expects a 1-D field");
  if (nodes < 3) nodes = 3;
  std::vector<double> out;
  out.reserve(gauge->size());
  for (double eps : gauge->eps()) {
    const Interval K = domain(eps);
    if (!(K.lo <= K.hi)) throw ValidationError("graded norm domain is empty");
    double best = 0.0;
    for (int k = 0; k <= l; ++k) {
      auto g = [&](double x) { return std::abs(gsf_derivative(f, eps, x, k)); };
      const double dx = (K.hi - K.lo) / static_cast<double>(nodes - 1);
      std::size_t arg = 0;
      double m = -1.0;
      for (std::size_t i = 0; i < nodes; ++i) {
        const double x = i + 1 == nodes ? K.hi : K.lo + i * dx;
        const double v = g(x);
        if (v > m) {
          m = v;
          arg = i;
        }
      }
      if (dx > 0.0) {
        const double lo = std::max(K.lo, K.lo + (static_cast<double>(arg) - 1.0) * dx);
        const double hi = std::min(K.hi, K.lo + (static_cast<double>(arg) + 1.0) * dx);
        m = std::max(m, golden_max(g, lo, hi));
      }
      best = std::max(best, m);
    }
    out.push_back(best);
  }
  return {l, GenNumber(gauge, std::move(out))};
}

TaylorReport taylor_check(const GsfField& f, double eps, double a, double k,
                          int n) {
  if (n < 0 || n + 1 > f.max_derivative_order())
    throw CapabilityError("taylor_check needs derivatives up to n+1");
  double poly = 0.0;
  double kp = 1.0;
  for (int j = 0; j <= n; ++j) {
    poly += gsf_derivative(f, eps, a, j) * kp / factorial(j);
    kp *= k;
  }
  const double residual = std::abs(f(eps, a + k) - poly);
  // Finite-difference derivatives of order n+1 carry noise far above 1e-14.
  QuadratureOptions qo;
  qo.abs_tol = 1e-14;
  qo.rel_tol = f.mode() == DerivativeMode::analytic ? 1e-12 : 1e-4;
  const double integral =
      integrate_adaptive(
          [&](double t) {
            return std::pow(1.0 - t, n) * gsf_derivative(f, eps, a + t * k, n + 1);
          },
          0.0, 1.0, qo)
          .value;
  const double remainder = std::abs(kp * integral / factorial(n));
  const double ratio = remainder > 0.0
                           ? residual / remainder
                           : std::numeric_limits<double>::quiet_NaN();
  return {residual, remainder, ratio};
}

}  // namespace gsfcv
