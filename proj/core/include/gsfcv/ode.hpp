#pragma once

// Dormand-Prince 8(5,3) with 7th-order dense output, PI step control,
// per-state step caps and root-located events that force step alignment.

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace gsfcv {

using State = Eigen::VectorXd;
using OdeRhs = std::function<void(double t, const State& y, State& dydt)>;
using EventFunction = std::function<double(double t, const State& y)>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double h_init = 0.0;  // 0: automatic estimate
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 5'000'000;
  double divergence_bound = 1e12;
  double event_tol = 1e-12;
  // Local cap on |h| as a function of the step's starting point.
  std::function<double(double t, const State& y)> step_cap;
  std::vector<EventFunction> events;
};

struct EventHit {
  double t;
  std::size_t index;
};

class DenseSolution {
 public:
  std::size_t dim() const noexcept { return dim_; }
  double t_begin() const noexcept { return times_.front(); }
  double t_end() const noexcept { return times_.back(); }
  // Integration direction: +1 forward, -1 backward.
  double direction() const noexcept { return dir_; }

  State operator()(double t) const;
  void evaluate(double t, State& out) const;

  // Accepted step end points, including the initial point.
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<State>& states() const noexcept { return states_; }
  const std::vector<EventHit>& events() const noexcept { return events_; }

  std::size_t accepted_steps() const noexcept { return accepted_; }
  std::size_t rejected_steps() const noexcept { return rejected_; }
  std::size_t rhs_evaluations() const noexcept { return nfev_; }

 private:
  friend DenseSolution integrate_dop853(const OdeRhs&, double, const State&,
                                        double, const OdeOptions&);
  std::size_t segment(double t) const;

  std::size_t dim_ = 0;
  double dir_ = 1.0;
  std::vector<double> times_;
  std::vector<State> states_;
  // Per step: n x 8 dense-output coefficients.
  std::vector<Eigen::MatrixXd> coeffs_;
  std::vector<EventHit> events_;
  std::size_t accepted_ = 0, rejected_ = 0, nfev_ = 0;
};

// Integrates y' = f(t, y) from t0 to t1 (t1 < t0 integrates backward).
// Throws StiffnessError on step-size underflow or step budget exhaustion
// and DivergenceError on non-finite or unbounded states.
DenseSolution integrate_dop853(const OdeRhs& f, double t0, const State& y0,
                               double t1, const OdeOptions& opts = {});

}  // namespace gsfcv
