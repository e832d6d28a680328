#include "gsfcv/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "gsfcv/error.hpp"

namespace gsfcv {

namespace {

// QUADPACK qk15 nodes and weights.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
};

struct WorstFirst {
  bool operator()(const Panel& x, const Panel& y) const {
    if (x.error != y.error) return x.error < y.error;
    return x.a > y.a;
  }
};

struct Rule {
  double value, error, floor;
};

Rule kronrod(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  double mag = std::abs(fc) * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kron += kWgk[j] * (f1 + f2);
    mag += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  return {kron * h, std::abs((kron - gauss) * h),
          50.0 * std::numeric_limits<double>::epsilon() * mag * std::abs(h)};
}

}  // namespace

QuadratureResult gauss_kronrod_15(const std::function<double(double)>& f,
                                  double a, double b) {
  const Rule r = kronrod(f, a, b);
  // Differences below the rounding floor carry no information.
  return {r.value, std::max(r.error, r.floor), 1};
}

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    const QuadratureOptions& opts,
                                    std::span<const double> breakpoints) {
  if (!(a <= b)) throw ValidationError("integrate: require a <= b");
  if (a == b) return {};

  std::vector<double> cuts{a};
  std::vector<double> inner(breakpoints.begin(), breakpoints.end());
  std::sort(inner.begin(), inner.end());
  for (double p : inner)
    if (p > a && p < b && p > cuts.back()) cuts.push_back(p);
  cuts.push_back(b);

  // A panel whose Kronrod-Gauss difference is below its rounding floor is
  // settled: splitting it cannot lower the error. Its floor is reported but
  // does not drive refinement.
  std::priority_queue<Panel, std::vector<Panel>, WorstFirst> heap;
  double total = 0.0, err = 0.0, roundoff = 0.0;
  auto push = [&](double lo, double hi) {
    const Rule r = kronrod(f, lo, hi);
    const double e = r.error <= r.floor ? 0.0 : r.error;
    if (e == 0.0) roundoff += r.floor;
    heap.push({lo, hi, r.value, e});
    total += r.value;
    err += e;
  };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) push(cuts[i], cuts[i + 1]);

  auto target = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };
  while (err > target()) {
    if (heap.size() >= opts.max_panels) {
      std::ostringstream os;
      os << "quadrature did not reach tolerance " << target() << " on [" << a
         << ", " << b << "] within " << opts.max_panels
         << " panels; achieved " << err;
      throw AccuracyError(os.str(), err);
    }
    const Panel worst = heap.top();
    if (worst.error == 0.0) {
      err = 0.0;  // only settled panels left; the sum drifted
      break;
    }
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Panel cannot be split any further in floating point.
      heap.push({worst.a, worst.b, worst.value, 0.0});
      err -= worst.error;
      continue;
    }
    total -= worst.value;
    err -= worst.error;
    push(worst.a, mid);
    push(mid, worst.b);
  }

  // Re-sum left to right so the result does not depend on refinement order.
  std::vector<Panel> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(),
            [](const Panel& x, const Panel& y) { return x.a < y.a; });
  QuadratureResult out;
  for (const auto& p : panels) {
    out.value += p.value;
    out.error += p.error;
  }
  out.error += roundoff;
  out.panels = panels.size();
  return out;
}

}  // namespace gsfcv
