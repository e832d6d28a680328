#include "gsfcv/mollifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "gsfcv/error.hpp"
#include "gsfcv/quadrature.hpp"

namespace gsfcv {

namespace {

double bump(double s) noexcept {
  if (s <= -1.0 || s >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s * s));
}

// p(s), p'(s), p''(s) for p(s) = sum c_k s^{2k}.
void even_poly(std::span<const double> c, double s, double& p, double& dp,
               double& d2p) noexcept {
  const double s2 = s * s;
  p = dp = d2p = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) {
    const double kk = static_cast<double>(k);
    p = p * s2 + c[k];
    if (k >= 1) dp = dp * s2 + 2.0 * kk * c[k];
    if (k >= 1) d2p = d2p * s2 + 2.0 * kk * (2.0 * kk - 1.0) * c[k];
  }
  // dp accumulated sum 2k c_k s^{2k-2}; d2p accumulated 2k(2k-1) c_k s^{2k-2}.
  dp *= s;
}

double golden_max(const std::function<double(double)>& f, double lo,
                  double hi) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 100 && b - a > 1e-14; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

struct Mollifier::Data {
  int moment_order = 0;
  double a = 0.5;
  GaugeKind kind = GaugeKind::power;
  std::vector<double> c;
  std::vector<double> table;  // primitive at uniform nodes on [-1, 1]
  double h = 0.0;
  double peak = 0.0;
  double peak_at = 0.0;
  double mass_excess = 0.0;

  double psi(double s) const noexcept {
    const double w = bump(s);
    if (w == 0.0) return 0.0;
    double p, dp, d2p;
    even_poly(c, s, p, dp, d2p);
    return p * w;
  }
  double dpsi(double s) const noexcept {
    const double w = bump(s);
    if (w == 0.0) return 0.0;
    double p, dp, d2p;
    even_poly(c, s, p, dp, d2p);
    const double u = 1.0 - s * s;
    const double g = -2.0 * s / (u * u);
    return (dp + p * g) * w;
  }
  double d2psi(double s) const noexcept {
    const double w = bump(s);
    if (w == 0.0) return 0.0;
    double p, dp, d2p;
    even_poly(c, s, p, dp, d2p);
    const double u = 1.0 - s * s;
    const double g = -2.0 * s / (u * u);
    const double dg = -2.0 / (u * u) - 8.0 * s * s / (u * u * u);
    return (d2p + 2.0 * dp * g + p * (dg + g * g)) * w;
  }
};

Mollifier Mollifier::build(int moment_order, double scale_exponent,
                           GaugeKind kind) {
  if (moment_order < 2 || moment_order > 12 || moment_order % 2 != 0)
    throw ValidationError("mollifier moment_order must be even in [2, 12], got " +
                          std::to_string(moment_order));
  return build_unchecked(moment_order, scale_exponent, kind);
}

Mollifier Mollifier::build_unchecked(int moment_order, double scale_exponent,
                                     GaugeKind kind) {
  if (!(scale_exponent > 0.0) || !std::isfinite(scale_exponent))
    throw ValidationError("mollifier scale_exponent must be positive");
  auto d = std::make_shared<Data>();
  d->moment_order = moment_order;
  d->a = scale_exponent;
  d->kind = kind;

  const int J = std::max(moment_order, 0) / 2;
  const int n = J + 1;
  QuadratureOptions qo;
  qo.abs_tol = 1e-18;
  qo.rel_tol = 1e-13;
  std::vector<double> mu(2 * J + 1);
  for (int k = 0; k <= 2 * J; ++k) {
    // Even integrand: integrate over [0,1] and double.
    mu[k] = 2.0 * integrate_adaptive(
                      [k](double x) { return std::pow(x, 2 * k) * bump(x); },
                      0.0, 1.0, qo)
                      .value;
  }
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) M(i, k) = mu[i + k];
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(0) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible())
    throw ConstructionError("singular moment matrix for moment_order " +
                            std::to_string(moment_order));
  Eigen::VectorXd c = lu.solve(rhs);
  // One step of iterative refinement; the Hankel matrix is ill-conditioned
  // at the upper end of the supported range.
  c += lu.solve(rhs - M * c);
  d->c.assign(c.data(), c.data() + n);

  // Primitive table with exact per-panel quadrature.
  const int N = kPrimitiveNodes;
  d->h = 2.0 / (N - 1);
  d->table.resize(N);
  d->table[0] = 0.0;
  auto psi = [&](double s) { return d->psi(s); };
  for (int k = 0; k + 1 < N; ++k) {
    const double lo = -1.0 + k * d->h;
    const double hi = (k + 2 == N) ? 1.0 : -1.0 + (k + 1) * d->h;
    d->table[k + 1] = d->table[k] + gauss_kronrod_15(psi, lo, hi).value;
  }

  // Peak of |psi| on [0, 1].
  auto apsi = [&](double s) { return std::abs(d->psi(s)); };
  const int S = 4000;
  int best = 0;
  double bestv = -1.0;
  for (int i = 0; i <= S; ++i) {
    const double v = apsi(static_cast<double>(i) / S);
    if (v > bestv) {
      bestv = v;
      best = i;
    }
  }
  const double lo = std::max(0.0, (best - 1.0) / S);
  const double hi = std::min(1.0, (best + 1.0) / S);
  const double sref = golden_max(apsi, lo, hi);
  if (apsi(sref) > bestv) {
    d->peak = apsi(sref);
    d->peak_at = sref;
  } else {
    d->peak = bestv;
    d->peak_at = static_cast<double>(best) / S;
  }

  // int |psi| with breaks at the sign changes of p.
  std::vector<double> roots;
  double prev = d->psi(0.0);
  for (int i = 1; i < S; ++i) {
    const double s = static_cast<double>(i) / S;
    double p, dp, d2p;
    even_poly(d->c, s, p, dp, d2p);
    if ((p > 0) != (prev > 0)) {
      double a = (i - 1.0) / S, b = s;
      double pa;
      even_poly(d->c, a, pa, dp, d2p);
      for (int it = 0; it < 80; ++it) {
        const double m = 0.5 * (a + b);
        double pm;
        even_poly(d->c, m, pm, dp, d2p);
        if ((pm > 0) == (pa > 0)) {
          a = m;
          pa = pm;
        } else {
          b = m;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev = p;
  }
  QuadratureOptions qa;
  qa.abs_tol = 1e-13;
  const double l1 =
      2.0 * integrate_adaptive(apsi, 0.0, 1.0, qa, roots).value;
  d->mass_excess = l1 - 1.0;

  return Mollifier(std::move(d));
}

int Mollifier::moment_order() const noexcept { return d_->moment_order; }
std::span<const double> Mollifier::poly_coeffs() const noexcept {
  return d_->c;
}
double Mollifier::scale_exponent() const noexcept { return d_->a; }
GaugeKind Mollifier::gauge_kind() const noexcept { return d_->kind; }

double Mollifier::b(double eps) const {
  return std::pow(Gauge::rho(d_->kind, eps), -d_->a);
}

double Mollifier::profile(double s) const noexcept { return d_->psi(s); }
double Mollifier::profile_derivative(double s) const noexcept {
  return d_->dpsi(s);
}
double Mollifier::profile_second_derivative(double s) const noexcept {
  return d_->d2psi(s);
}

double Mollifier::primitive(double s) const noexcept {
  if (s <= -1.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const auto& T = d_->table;
  const double h = d_->h;
  const double pos = (s + 1.0) / h;
  std::size_t k = static_cast<std::size_t>(pos);
  if (k + 1 >= T.size()) k = T.size() - 2;
  const double s0 = -1.0 + k * h;
  const double s1 = (k + 2 == T.size()) ? 1.0 : s0 + h;
  const double w = s1 - s0;
  const double t = (s - s0) / w;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double H0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
  const double H1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
  const double H2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  const double H3 = 0.5 * t3 - t4 + 0.5 * t5;
  const double H4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
  const double H5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
  return T[k] * H0 + d_->psi(s0) * w * H1 + d_->dpsi(s0) * w * w * H2 +
         d_->dpsi(s1) * w * w * H3 + d_->psi(s1) * w * H4 + T[k + 1] * H5;
}

double Mollifier::peak() const noexcept { return d_->peak; }
double Mollifier::peak_location() const noexcept { return d_->peak_at; }
double Mollifier::mass_excess() const noexcept { return d_->mass_excess; }

double Mollifier::moment(int k, double tol) const {
  if (k < 0) throw ValidationError("moment index must be non-negative");
  QuadratureOptions qo;
  qo.abs_tol = tol;
  // Folded onto [0, 1]; psi is even bitwise, so odd moments cancel exactly.
  const double sign = k % 2 == 0 ? 1.0 : -1.0;
  return integrate_adaptive(
             [this, k, sign](double s) {
               return std::pow(s, k) * (d_->psi(s) + sign * d_->psi(-s));
             },
             0.0, 1.0, qo)
      .value;
}

double delta_at(const Mollifier& m, double eps, double x) {
  const double b = m.b(eps);
  return b * m.profile(b * x);
}

double heaviside_at(const Mollifier& m, double eps, double x) {
  const double b = m.b(eps);
  return m.primitive(b * x);
}

double delta_compose_delta(const Mollifier& m, double eps, double x) {
  const double b = m.b(eps);
  return b * m.profile(b * b * m.profile(b * x));
}

// --- PiecewisePolynomial ---------------------------------------------------

namespace {

double horner(const std::vector<double>& c, double x) noexcept {
  double v = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) v = v * x + c[k];
  return v;
}

}  // namespace

double PiecewisePolynomial::operator()(double x) const {
  if (breaks.size() < 2 || x < breaks.front() || x >= breaks.back())
    return 0.0;
  const auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - breaks.begin()) - 1;
  return horner(pieces.at(i), x);
}

PiecewisePolynomial PiecewisePolynomial::derivative() const {
  PiecewisePolynomial d;
  d.breaks = breaks;
  for (const auto& c : pieces) {
    std::vector<double> dc;
    for (std::size_t k = 1; k < c.size(); ++k)
      dc.push_back(static_cast<double>(k) * c[k]);
    d.pieces.push_back(std::move(dc));
  }
  return d;
}

std::vector<std::pair<double, double>> PiecewisePolynomial::jumps() const {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    const double c = breaks[i];
    if (!std::isfinite(c)) continue;
    const double left = i == 0 ? 0.0 : horner(pieces.at(i - 1), c);
    const double right = i + 1 == breaks.size() ? 0.0 : horner(pieces.at(i), c);
    if (right != left) out.emplace_back(c, right - left);
  }
  return out;
}

PiecewisePolynomial PiecewisePolynomial::indicator(double lo, double hi) {
  return polynomial({1.0}, lo, hi);
}

PiecewisePolynomial PiecewisePolynomial::polynomial(std::vector<double> coeffs,
                                                    double lo, double hi) {
  if (!(lo < hi)) throw ValidationError("piecewise break points must increase");
  PiecewisePolynomial f;
  f.breaks = {lo, hi};
  f.pieces = {std::move(coeffs)};
  return f;
}

double embed_piecewise(const Mollifier& m, const PiecewisePolynomial& f,
                       double eps, double x, double tol) {
  if (f.breaks.size() != f.pieces.size() + 1)
    throw ValidationError("piecewise polynomial needs pieces + 1 breaks");
  for (std::size_t i = 1; i < f.breaks.size(); ++i)
    if (!(f.breaks[i - 1] < f.breaks[i]))
      throw ValidationError("piecewise break points must increase");
  const double b = m.b(eps);
  // (f * psi_b)(x) = int_{-1}^{1} f(x - s/b) psi(s) ds
  std::vector<double> bp{0.0};
  for (double c : f.breaks)
    if (std::isfinite(c)) {
      const double s = b * (x - c);
      if (s > -1.0 && s < 1.0) bp.push_back(s);
    }
  std::sort(bp.begin(), bp.end());
  QuadratureOptions qo;
  qo.abs_tol = tol;
  return integrate_adaptive(
             [&](double s) { return f(x - s / b) * m.profile(s); }, -1.0, 1.0,
             qo, bp)
      .value;
}

// --- EmbeddedField ---------------------------------------------------------

EmbeddedField::EmbeddedField(EmbeddedSource source, Mollifier m, GaugePtr gauge,
                             PiecewisePolynomial data)
    : source_(source), m_(std::move(m)), gauge_(std::move(gauge)),
      data_(std::move(data)) {
  if (!gauge_) throw ValidationError("embedded field needs a gauge");
  if (source_ == EmbeddedSource::piecewise &&
      data_.breaks.size() != data_.pieces.size() + 1)
    throw ValidationError("piecewise polynomial needs pieces + 1 breaks");
}

void EmbeddedField::require_grid(double eps) const {
  if (!gauge_->contains(eps))
    throw ValidationError("eps " + std::to_string(eps) +
                          " is not on the gauge grid");
}

int EmbeddedField::max_derivative_order() const noexcept {
  switch (source_) {
    case EmbeddedSource::dirac: return 2;
    case EmbeddedSource::heaviside: return 3;
    case EmbeddedSource::piecewise: return 1;
  }
  return 0;
}

double EmbeddedField::operator()(double eps, double x) const {
  require_grid(eps);
  switch (source_) {
    case EmbeddedSource::dirac: return delta_at(m_, eps, x);
    case EmbeddedSource::heaviside: return heaviside_at(m_, eps, x);
    case EmbeddedSource::piecewise: return embed_piecewise(m_, data_, eps, x);
  }
  return 0.0;
}

double EmbeddedField::derivative(double eps, double x, int order) const {
  if (order < 0 || order > max_derivative_order())
    throw CapabilityError("derivative order " + std::to_string(order) +
                          " not available for this embedded field");
  if (order == 0) return (*this)(eps, x);
  require_grid(eps);
  const double b = m_.b(eps);
  const double s = b * x;
  // Shift so that heaviside order k matches dirac order k-1.
  int k = order;
  if (source_ == EmbeddedSource::heaviside) --k;
  if (source_ == EmbeddedSource::piecewise) {
    double v = embed_piecewise(m_, data_.derivative(), eps, x);
    for (auto [c, jump] : data_.jumps()) v += jump * delta_at(m_, eps, x - c);
    return v;
  }
  switch (k) {
    case 0: return b * m_.profile(s);
    case 1: return b * b * m_.profile_derivative(s);
    default: return b * b * b * m_.profile_second_derivative(s);
  }
}

GsfField EmbeddedField::as_field() const {
  const EmbeddedField self = *this;
  auto f = GsfField::univariate(
      [self](double eps, double x) { return self(eps, x); },
      [self](double eps, double x, int k) { return self.derivative(eps, x, k); },
      max_derivative_order());
  std::vector<double> layers;
  if (source_ == EmbeddedSource::piecewise) {
    for (double c : data_.breaks)
      if (std::isfinite(c)) layers.push_back(c);
  } else {
    layers.push_back(0.0);
  }
  const Mollifier m = m_;
  f.with_layers(std::move(layers), [m](double eps) { return 1.0 / m.b(eps); });
  return f;
}

}  // namespace gsfcv
