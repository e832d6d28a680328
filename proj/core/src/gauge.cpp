#include "gsfcv/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gsfcv/error.hpp"

namespace gsfcv {

Gauge::Gauge(GaugeKind kind, std::vector<double> eps_grid)
    : kind_(kind), eps_(std::move(eps_grid)) {
  if (eps_.empty()) throw ValidationError("gauge: eps grid is empty");
  for (std::size_t i = 0; i < eps_.size(); ++i) {
    const double e = eps_[i];
    if (!(e > 0.0 && e <= 1.0))
      throw ValidationError("gauge: eps grid entries must lie in (0,1]");
    if (i > 0 && !(e < eps_[i - 1]))
      throw ValidationError("gauge: eps grid must be strictly decreasing");
    if (!(rho(kind_, e) > 0.0))
      throw ValidationError("gauge: rho underflows to zero at eps = " +
                            std::to_string(e));
  }
}

Gauge Gauge::geometric(GaugeKind kind, double eps_max, double eps_min,
                       std::size_t points) {
  if (points == 0) throw ValidationError("gauge: points must be >= 1");
  if (points == 1) return Gauge(kind, {eps_max});
  if (!(eps_min < eps_max))
    throw ValidationError("gauge: eps_min must be smaller than eps_max");
  std::vector<double> grid(points);
  const double log_ratio = std::log(eps_min / eps_max) /
                           static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k)
    grid[k] = eps_max * std::exp(log_ratio * static_cast<double>(k));
  grid.back() = eps_min;
  // Dyadic endpoints with an integer exponent step give an exact grid.
  int e_max = 0, e_min = 0;
  const bool dyadic = std::frexp(eps_max, &e_max) == 0.5 &&
                      std::frexp(eps_min, &e_min) == 0.5;
  const int span = e_max - e_min;
  if (dyadic && span % static_cast<int>(points - 1) == 0) {
    const int step = span / static_cast<int>(points - 1);
    for (std::size_t k = 0; k < points; ++k)
      grid[k] = std::ldexp(eps_max, -step * static_cast<int>(k));
  }
  return Gauge(kind, std::move(grid));
}

Gauge Gauge::standard(GaugeKind kind) {
  std::vector<double> grid(12);
  for (int k = 0; k < 12; ++k) grid[k] = std::ldexp(1.0, -(4 + k));
  return Gauge(kind, std::move(grid));
}

double Gauge::rho(GaugeKind kind, double eps) {
  switch (kind) {
    case GaugeKind::power:
      return eps;
    case GaugeKind::exponential:
      return std::exp(-1.0 / eps);
  }
  return eps;
}

bool Gauge::contains(double e) const noexcept {
  return std::find(eps_.begin(), eps_.end(), e) != eps_.end();
}

GenNumber::GenNumber(GaugePtr gauge, std::vector<double> values)
    : gauge_(std::move(gauge)), values_(std::move(values)) {
  if (!gauge_) throw ValidationError("generalized number without gauge");
  if (values_.size() != gauge_->size())
    throw StructuralError("generalized number: " +
                          std::to_string(values_.size()) +
                          " samples for a grid of " +
                          std::to_string(gauge_->size()));
  for (double v : values_)
    if (!std::isfinite(v))
      throw ValidationError("generalized number: non-finite sample");
}

GenNumber GenNumber::constant(GaugePtr gauge, double c) {
  std::vector<double> v(gauge->size(), c);
  return GenNumber(std::move(gauge), std::move(v));
}

namespace {

void require_same_grid(const GenNumber& x, const GenNumber& y) {
  if (x.gauge_ptr() != y.gauge_ptr() && !(x.gauge() == y.gauge()))
    throw StructuralError("generalized numbers live on different gauges");
}

struct LogFit {
  double slope;
  double rms;
};

// Least-squares slope of log|x| against log rho over [first, n).
LogFit fit_log_slope(const GenNumber& x, std::size_t first) {
  const auto& g = x.gauge();
  const std::size_t n = g.size();
  const double tiny = std::numeric_limits<double>::min();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(n - first);
  std::vector<double> lx, ly;
  for (std::size_t i = first; i < n; ++i) {
    const double u = g.kind() == GaugeKind::power ? std::log(g.eps(i))
                                                  : -1.0 / g.eps(i);
    const double v = std::log(std::max(std::abs(x[i]), tiny));
    lx.push_back(u);
    ly.push_back(v);
    sx += u;
    sy += v;
    sxx += u * u;
    sxy += u * v;
  }
  const double den = m * sxx - sx * sx;
  const double slope = den != 0.0 ? (m * sxy - sx * sy) / den : 0.0;
  const double icpt = (sy - slope * sx) / m;
  double ss = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    const double r = ly[k] - (icpt + slope * lx[k]);
    ss += r * r;
  }
  return {slope, std::sqrt(ss / m)};
}

}  // namespace

GenNumber gen_arith(const GenNumber& x, const GenNumber& y, ArithOp op,
                    const RingThresholds& th) {
  require_same_grid(x, y);
  if (op == ArithOp::div) {
    const auto w = is_strictly_positive(abs(y), th);
    if (!w.positive)
      throw InvertibilityError(
          "division by a generalized number that is not invertible on the "
          "grid tail");
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    switch (op) {
      case ArithOp::add: out[i] = x[i] + y[i]; break;
      case ArithOp::sub: out[i] = x[i] - y[i]; break;
      case ArithOp::mul: out[i] = x[i] * y[i]; break;
      case ArithOp::div: out[i] = x[i] / y[i]; break;
    }
  }
  return GenNumber(x.gauge_ptr(), std::move(out));
}

GenNumber operator+(const GenNumber& x, const GenNumber& y) {
  return gen_arith(x, y, ArithOp::add);
}
GenNumber operator-(const GenNumber& x, const GenNumber& y) {
  return gen_arith(x, y, ArithOp::sub);
}
GenNumber operator*(const GenNumber& x, const GenNumber& y) {
  return gen_arith(x, y, ArithOp::mul);
}
GenNumber operator/(const GenNumber& x, const GenNumber& y) {
  return gen_arith(x, y, ArithOp::div);
}

GenNumber abs(const GenNumber& x) {
  std::vector<double> v(x.values().begin(), x.values().end());
  for (double& s : v) s = std::abs(s);
  return GenNumber(x.gauge_ptr(), std::move(v));
}

AsymptoticClass classify(const GenNumber& x, const RingThresholds& th) {
  const auto& g = x.gauge();
  if (g.size() < 4)
    throw InsufficientDataError("classify needs at least 4 grid points, got " +
                                std::to_string(g.size()));
  const std::size_t first = g.tail_begin(std::max<std::size_t>(th.tail, 4));
  const std::size_t n = g.size();

  bool all_zero = true;
  for (std::size_t i = first; i < n; ++i) all_zero &= (x[i] == 0.0);
  if (all_zero) {
    // Exact zero beats every power; report the cap.
    return {AsymptoticTag::infinitesimal, static_cast<double>(th.m_max), 0.0};
  }

  const LogFit fit = fit_log_slope(x, first);
  bool non_increasing = true;
  bool non_decreasing = true;
  for (std::size_t i = first + 1; i < n; ++i) {
    const double prev = std::abs(x[i - 1]);
    const double cur = std::abs(x[i]);
    if (cur > prev * (1.0 + 1e-12)) non_increasing = false;
    if (cur < prev * (1.0 - 1e-12)) non_decreasing = false;
  }

  AsymptoticTag tag = AsymptoticTag::unclassified;
  if (fit.slope >= th.sigma_min && non_increasing)
    tag = AsymptoticTag::infinitesimal;
  else if (fit.slope <= -th.sigma_min && non_decreasing)
    tag = AsymptoticTag::infinite;
  else if (std::abs(fit.slope) < th.sigma_min)
    tag = AsymptoticTag::finite;
  return {tag, fit.slope, fit.rms};
}

PositivityWitness is_strictly_positive(const GenNumber& x,
                                       const RingThresholds& th) {
  const auto& g = x.gauge();
  const std::size_t first = g.tail_begin(th.tail);
  for (int m = 0; m <= th.m_max; ++m) {
    bool ok = true;
    for (std::size_t i = first; i < g.size() && ok; ++i)
      ok = x[i] > std::pow(g.rho_at(i), m);
    if (ok) return {true, m};
  }
  return {false, -1};
}

bool is_negligible_to_order(const GenNumber& x, int q,
                            const RingThresholds& th) {
  if (q < 0) throw ValidationError("negligibility order must be >= 0");
  const auto& g = x.gauge();
  for (std::size_t i = g.tail_begin(th.tail); i < g.size(); ++i)
    if (!(std::abs(x[i]) <= std::pow(g.rho_at(i), q))) return false;
  return true;
}

bool is_far_from(const GenNumber& x, const GenNumber& y,
                 const RingThresholds& th) {
  require_same_grid(x, y);
  const auto c = classify(abs(x - y), th);
  return c.slope <= th.sigma_far;
}

std::pair<GenNumber, GenNumber> inf_sup(const GenNumber& x,
                                        const GenNumber& y) {
  require_same_grid(x, y);
  std::vector<double> lo(x.size()), hi(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    lo[i] = std::min(x[i], y[i]);
    hi[i] = std::max(x[i], y[i]);
  }
  return {GenNumber(x.gauge_ptr(), std::move(lo)),
          GenNumber(x.gauge_ptr(), std::move(hi))};
}

const char* to_string(AsymptoticTag tag) noexcept {
  switch (tag) {
    case AsymptoticTag::infinitesimal: return "infinitesimal";
    case AsymptoticTag::infinite: return "infinite";
    case AsymptoticTag::finite: return "finite";
    case AsymptoticTag::unclassified: return "unclassified";
  }
  return "unclassified";
}

const char* to_string(GaugeKind kind) noexcept {
  return kind == GaugeKind::power ? "power" : "exponential";
}

}  // namespace gsfcv
