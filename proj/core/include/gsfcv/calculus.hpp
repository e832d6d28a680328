#pragma once

// Nets of smooth functions evaluated one eps at a time: derivatives,
// 1-D integrals, graded norms and Taylor checks.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "gsfcv/gauge.hpp"

namespace gsfcv {

enum class DerivativeMode { analytic, finite_difference };

struct Interval {
  double lo;
  double hi;
};

class GsfField {
 public:
  using Value = std::function<double(double eps, std::span<const double> x)>;
  // d^k/ds^k f_eps(x + s v) at s = 0.
  using Directional = std::function<double(
      double eps, std::span<const double> x, std::span<const double> v,
      int order)>;
  using Univariate = std::function<double(double eps, double x)>;
  using UnivariateDerivative =
      std::function<double(double eps, double x, int order)>;

  // Analytic mode when `directional` is provided, finite differences otherwise.
  GsfField(std::size_t dim, Value value, int max_order,
           Directional directional = {});

  static GsfField univariate(Univariate f, UnivariateDerivative df,
                             int max_order);
  static GsfField univariate_fd(Univariate f, int max_order);

  std::size_t dim() const noexcept { return dim_; }
  int max_derivative_order() const noexcept { return max_order_; }
  DerivativeMode mode() const noexcept {
    return directional_ ? DerivativeMode::analytic
                        : DerivativeMode::finite_difference;
  }

  double operator()(double eps, std::span<const double> x) const {
    return value_(eps, x);
  }
  double operator()(double eps, double x) const {
    return value_(eps, std::span<const double>(&x, 1));
  }

  // Singular layers: points where the field varies on a 1/b_eps scale.
  // `halfwidth(eps)` is the layer half-width 1/b_eps.
  GsfField& with_layers(std::vector<double> points,
                        std::function<double(double)> halfwidth);
  std::span<const double> layers() const noexcept { return layers_; }
  double layer_halfwidth(double eps) const {
    return halfwidth_ ? halfwidth_(eps) : 0.0;
  }
  // True within 2/b_eps of a declared layer, where finite differences
  // lose accuracy.
  bool near_layer(double eps, double x) const;

  const Directional& directional() const noexcept { return directional_; }

 private:
  std::size_t dim_;
  Value value_;
  int max_order_;
  Directional directional_;
  std::vector<double> layers_;
  std::function<double(double)> halfwidth_;
};

GsfField sum(const GsfField& f, const GsfField& g);
GsfField product(const GsfField& f, const GsfField& g);
// (f o g)(x) = f(g(x)) for univariate fields.
GsfField compose(const GsfField& f, const GsfField& g);
GsfField scaled(const GsfField& f, double c);

double gsf_derivative(const GsfField& f, double eps,
                      std::span<const double> x,
                      std::span<const double> direction, int order);
double gsf_derivative(const GsfField& f, double eps, double x, int order);

double integrate_1d(const GsfField& f, double eps, double a, double b,
                    double tol = 1e-10,
                    std::span<const double> extra_breakpoints = {});

struct GradedNorm {
  int order;
  GenNumber value;
};

// max over x in K_eps of |d^k f_eps(x)|, k <= l. Dense sampling followed by
// golden-section refinement around the best node, so the result is a lower
// bound of the true norm within sampling resolution.
GradedNorm graded_norm(const GsfField& f, const GaugePtr& gauge, int l,
                       const std::function<Interval(double eps)>& domain,
                       std::size_t nodes = 2048);

struct TaylorReport {
  double residual;   // |f(a+k) - sum_{j<=n} f^(j)(a) k^j / j!|
  double remainder;  // |k^{n+1}/n! int_0^1 (1-t)^n f^(n+1)(a+tk) dt|
  double ratio;      // residual / remainder, NaN when remainder is 0
};

TaylorReport taylor_check(const GsfField& f, double eps, double a, double k,
                          int n);

// Order-k central difference of a scalar function with O(h^2) error.
double central_difference(const std::function<double(double)>& g, double x,
                          int order, double h);

// d^k g/dt^k at t from a 4th-order accurate stencil of spacing h. The
// stencil is centered when it fits in [lo, hi] and shifted inward otherwise.
double stencil_derivative(const std::function<double(double)>& g, double t,
                          int order, double h, double lo, double hi);

}  // namespace gsfcv
