#pragma once

// Vanishing-moment mollifiers and the embeddings of delta, Heaviside and
// compactly supported piecewise-polynomial data that they induce.

#include <memory>
#include <span>
#include <vector>

#include "gsfcv/calculus.hpp"
#include "gsfcv/gauge.hpp"

namespace gsfcv {

// psi(s) = p(s) * bump(s) with p even, supp psi = [-1,1], int psi = 1 and
// int s^k psi = 0 for 1 <= k <= moment_order. The same profile is used for
// every eps; b_eps = rho_eps^{-a} rescales it.
class Mollifier {
 public:
  static constexpr int kPrimitiveNodes = 4096;

  // moment_order must be even and in [2, 12].
  static Mollifier build(int moment_order, double scale_exponent = 0.5,
                         GaugeKind kind = GaugeKind::power);
  // Same construction without the range check; moment_order < 2 yields the
  // plain normalized bump. Meant for diagnostics of misconfigured runs.
  static Mollifier build_unchecked(int moment_order, double scale_exponent,
                                   GaugeKind kind);

  int moment_order() const noexcept;
  std::span<const double> poly_coeffs() const noexcept;
  double scale_exponent() const noexcept;
  GaugeKind gauge_kind() const noexcept;

  double b(double eps) const;
  double profile(double s) const noexcept;
  double profile_derivative(double s) const noexcept;
  double profile_second_derivative(double s) const noexcept;
  // int_{-1}^{s} psi, from the precomputed table; exact 0 / 1 outside.
  double primitive(double s) const noexcept;

  double value_at_origin() const noexcept { return profile(0.0); }
  // max_s |psi(s)| and its location (s >= 0).
  double peak() const noexcept;
  double peak_location() const noexcept;
  // eta in int |psi| = 1 + eta.
  double mass_excess() const noexcept;
  // int s^k psi by adaptive quadrature.
  double moment(int k, double tol = 1e-14) const;

 private:
  struct Data;
  explicit Mollifier(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
  std::shared_ptr<const Data> d_;
};

double delta_at(const Mollifier& m, double eps, double x);
double heaviside_at(const Mollifier& m, double eps, double x);
double delta_compose_delta(const Mollifier& m, double eps, double x);

// f(x) = poly_i(x) on [breaks[i], breaks[i+1]), zero outside. Breaks may be
// +-infinity; coefficients are in the power basis, lowest degree first.
struct PiecewisePolynomial {
  std::vector<double> breaks;
  std::vector<std::vector<double>> pieces;

  double operator()(double x) const;
  PiecewisePolynomial derivative() const;
  // Jump f(c+) - f(c-) at every finite break.
  std::vector<std::pair<double, double>> jumps() const;

  static PiecewisePolynomial indicator(double lo, double hi);
  static PiecewisePolynomial polynomial(std::vector<double> coeffs,
                                        double lo, double hi);
};

// (f * psi_eps)(x), adaptive quadrature over the support intersection.
double embed_piecewise(const Mollifier& m, const PiecewisePolynomial& f,
                       double eps, double x, double tol = 1e-12);

enum class EmbeddedSource { dirac, heaviside, piecewise };

// A distribution embedded on a gauge: evaluable at grid eps only.
class EmbeddedField {
 public:
  EmbeddedField(EmbeddedSource source, Mollifier m, GaugePtr gauge,
                PiecewisePolynomial data = {});

  EmbeddedSource source() const noexcept { return source_; }
  const Mollifier& mollifier() const noexcept { return m_; }
  const Gauge& gauge() const noexcept { return *gauge_; }

  double operator()(double eps, double x) const;
  // Analytic derivatives: dirac up to 2, heaviside up to 3, piecewise 1.
  double derivative(double eps, double x, int order) const;
  int max_derivative_order() const noexcept;

  GsfField as_field() const;

 private:
  void require_grid(double eps) const;

  EmbeddedSource source_;
  Mollifier m_;
  GaugePtr gauge_;
  PiecewisePolynomial data_;
};

}  // namespace gsfcv
