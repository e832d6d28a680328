#pragma once

// Robinson-Colombeau generalized numbers sampled on a finite epsilon grid.
//
// A generalized number is a net (x_eps) modulo negligible nets. Here it is
// represented by its samples on a strictly decreasing grid of eps values;
// every asymptotic statement ("for all sufficiently small eps") is replaced
// by a statement about the grid tail.

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace gsfcv {

enum class GaugeKind {
  power,        // rho_eps = eps
  exponential,  // rho_eps = exp(-1/eps)
};

class Gauge {
 public:
  Gauge(GaugeKind kind, std::vector<double> eps_grid);

  // eps_k = eps_max * r^k with r chosen so that the last point is eps_min.
  static Gauge geometric(GaugeKind kind, double eps_max, double eps_min,
                         std::size_t points);
  // eps_k = 2^-(4+k), k = 0..11.
  static Gauge standard(GaugeKind kind = GaugeKind::power);

  static double rho(GaugeKind kind, double eps);

  GaugeKind kind() const noexcept { return kind_; }
  std::span<const double> eps() const noexcept { return eps_; }
  std::size_t size() const noexcept { return eps_.size(); }
  double eps(std::size_t i) const { return eps_.at(i); }
  double rho_at(std::size_t i) const { return rho(kind_, eps_.at(i)); }
  bool contains(double eps) const noexcept;

  // First index of the regression tail (the last `tail` points).
  std::size_t tail_begin(std::size_t tail) const noexcept {
    return eps_.size() > tail ? eps_.size() - tail : 0;
  }

  friend bool operator==(const Gauge& a, const Gauge& b) {
    return a.kind_ == b.kind_ && a.eps_ == b.eps_;
  }

 private:
  GaugeKind kind_;
  std::vector<double> eps_;
};

using GaugePtr = std::shared_ptr<const Gauge>;

inline GaugePtr make_gauge(Gauge g) {
  return std::make_shared<const Gauge>(std::move(g));
}

class GenNumber {
 public:
  GenNumber(GaugePtr gauge, std::vector<double> values);

  // Samples fn(eps, rho_eps) on every grid point.
  template <class Fn>
  static GenNumber sample(GaugePtr gauge, Fn&& fn) {
    std::vector<double> v;
    v.reserve(gauge->size());
    for (std::size_t i = 0; i < gauge->size(); ++i)
      v.push_back(fn(gauge->eps(i), gauge->rho_at(i)));
    return GenNumber(std::move(gauge), std::move(v));
  }
  static GenNumber constant(GaugePtr gauge, double c);

  const Gauge& gauge() const noexcept { return *gauge_; }
  const GaugePtr& gauge_ptr() const noexcept { return gauge_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_.at(i); }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  GaugePtr gauge_;
  std::vector<double> values_;
};

enum class ArithOp { add, sub, mul, div };

// Thresholds that stand in for the quantifiers "for all a > 0" and
// "there exists m" which a finite grid cannot decide.
struct RingThresholds {
  double sigma_min = 0.1;
  double sigma_far = 0.2;
  int m_max = 20;
  int q_max = 5;
  std::size_t tail = 8;
};

enum class AsymptoticTag { infinitesimal, infinite, finite, unclassified };

struct AsymptoticClass {
  AsymptoticTag tag;
  double slope;       // s in |x_eps| ~ C rho_eps^s
  double confidence;  // RMS residual of the log-log fit
};

struct PositivityWitness {
  bool positive = false;
  int m = -1;  // smallest m with x_eps > rho_eps^m on the tail, -1 if none
};

GenNumber gen_arith(const GenNumber& x, const GenNumber& y, ArithOp op,
                    const RingThresholds& th = {});

GenNumber operator+(const GenNumber& x, const GenNumber& y);
GenNumber operator-(const GenNumber& x, const GenNumber& y);
GenNumber operator*(const GenNumber& x, const GenNumber& y);
GenNumber operator/(const GenNumber& x, const GenNumber& y);
GenNumber abs(const GenNumber& x);

AsymptoticClass classify(const GenNumber& x, const RingThresholds& th = {});
PositivityWitness is_strictly_positive(const GenNumber& x,
                                       const RingThresholds& th = {});
bool is_negligible_to_order(const GenNumber& x, int q,
                            const RingThresholds& th = {});
bool is_far_from(const GenNumber& x, const GenNumber& y,
                 const RingThresholds& th = {});
std::pair<GenNumber, GenNumber> inf_sup(const GenNumber& x,
                                        const GenNumber& y);

const char* to_string(AsymptoticTag tag) noexcept;
const char* to_string(GaugeKind kind) noexcept;

}  // namespace gsfcv
