#pragma once

// Post-processing shared by the experiment runner and the acceptance
// suite: energy drift per segment, layer-crossing statistics, damped jump
// extraction, side-wise PU fits, variational residual scans and the
// reference control problems.

#include <cstddef>
#include <vector>

#include <gsfcv/dynamics.hpp>
#include <gsfcv/optctrl.hpp>

namespace gsfcv::cli {

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Relative energy spread on each maximal run of monitor nodes farther than
// 1/b from every layer, and relative energy change across each run of
// nodes inside a layer that is bracketed by far nodes.
struct EnergyDrift {
  std::vector<double> far;
  std::vector<double> crossing;
};
EnergyDrift energy_drift(const Trajectory& tr);

// Interval [entry, exit] of the first complete layer transit, if any.
struct Transit {
  bool found = false;
  double entry = 0.0;
  double exit = 0.0;
};
Transit first_transit(const Trajectory& tr);

// max |q^(order)| over the transit, sampled on the dense output.
double peak_highest_derivative(const Trajectory& tr, const Transit& w,
                               std::size_t samples = 801);

// One crossing of a damped-system layer. The jump of theta'' is oriented
// from the outer medium into the inner one and measured two ways: raw
// difference at the layer edges |theta - c| = 1/b, and one-sided quadratic
// extrapolation of each far side to the crossing time.
struct JumpSample {
  double t;
  double dtheta;
  double expected;  // -2 (beta2 - beta1) dtheta
  double extrapolated;
  double raw;
  // Layer transit 2/(b |theta'|) at most 1/40 of the small-oscillation
  // period; slower crossings still carry O(1/b) smoothing error.
  bool resolved;
};
std::vector<JumpSample> damped_jumps(const Trajectory& tr,
                                     double min_speed = 0.05);

struct Peak {
  double t;
  double amplitude;
};
// Local maxima of |q| located by bisection on q' along the dense output.
std::vector<Peak> amplitude_peaks(const Trajectory& tr);

// Constant-frequency fits on both sides of the PU switch, each anchored at
// the side's start, and per-side energy spread.
struct PuSides {
  double delta;  // 4 / b
  PuAnalytic before, after;
  double fit_error_before, fit_error_after;
  double drift_before, drift_after;
  double energy_before, energy_after;
};
PuSides pu_sides(const Trajectory& tr);

struct ResidualRow {
  double t;
  double el;
  double recurrence;
  double dbr;
  double noether;  // NaN for the damped system
};
struct ResidualScan {
  std::vector<ResidualRow> rows;
  double scale = 1.0;  // max(1, max |L|) over the rows
  double max_el = 0.0, max_recurrence = 0.0, max_dbr = 0.0;
  // Relative spread of the time-translation constant on each segment of
  // consecutive rows not separated by a layer.
  std::vector<double> noether_drift;
};
// Samples `samples` interior times and keeps those whose residual stencils
// stay at least 4/b away from every layer.
ResidualScan residual_scan(const Trajectory& tr, std::size_t samples = 199);

// min 1/2 int (q^2 + u^2) subject to q' = u, q(t1) = q1.
ControlProblem lqr_problem(double t1, double t2, double q1);
double lqr_optimal_control(double t, double t1, double t2, double q1);
double lqr_optimal_cost(double t1, double t2, double q1);

// Nonautonomous and nonlinear: L = 1/2 (q^2 + u^2) + t q, q' = sin q + u.
ControlProblem nonlinear_test_problem();

}  // namespace gsfcv::cli
