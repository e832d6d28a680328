#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace gsfcv {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  std::size_t max_panels = 100000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t panels = 0;
};

// Globally adaptive Gauss-Kronrod (7/15) quadrature. The interval is split at
// every breakpoint inside (a, b) before adaptivity starts, so a narrow spike
// at a declared point cannot be stepped over. Throws AccuracyError when the
// panel budget runs out.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    const QuadratureOptions& opts = {},
                                    std::span<const double> breakpoints = {});

// Single 15-point Kronrod panel; `error` is |K15 - G7|.
QuadratureResult gauss_kronrod_15(const std::function<double(double)>& f,
                                  double a, double b);

}  // namespace gsfcv
