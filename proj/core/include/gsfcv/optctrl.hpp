#pragma once

// Weak Pontryagin machinery for I[u] = int L(t, q, u) dt subject to
// q' = phi(t, q, u), q(t1) = q1: Hamiltonian, state / adjoint / linearized
// Cauchy problems, first variation of I and a forward-backward sweep.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gsfcv/ode.hpp"

namespace gsfcv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct ControlProblem {
  using Scalar = std::function<double(double t, const Vec& q, const Vec& u)>;
  using Vector = std::function<Vec(double t, const Vec& q, const Vec& u)>;
  using Matrix = std::function<Mat(double t, const Vec& q, const Vec& u)>;

  int state_dim = 1;
  int control_dim = 1;
  Scalar L;
  Vector dL_dq;
  Vector dL_du;
  Vector phi;
  Matrix dphi_dq;  // state_dim x state_dim
  Matrix dphi_du;  // state_dim x control_dim
  // Optional explicit time partials; central differences otherwise.
  Scalar dL_dt;
  Vector dphi_dt;
  Vec q1;
  double t1 = 0.0;
  double t2 = 1.0;
  std::vector<std::pair<double, double>> control_box;

  // Shapes, interval and finite initial state. Throws ValidationError.
  void validate() const;
  // Cross-checks every partial against central differences at random
  // probes in [-range, range]. Throws ConsistencyError.
  void validate_partials(std::uint64_t seed, int probes = 8,
                         double rel_tol = 1e-5, double range = 1.0) const;
};

// Control on a uniform node grid with a C2 cubic spline in between. End
// slopes come from one-sided 4th-order differences.
class ControlSignal {
 public:
  ControlSignal(double t1, double t2, std::vector<Vec> values);
  static ControlSignal constant(double t1, double t2, std::size_t nodes,
                                const Vec& value);
  static ControlSignal sample(double t1, double t2, std::size_t nodes,
                              const std::function<Vec(double)>& f);

  double t1() const noexcept { return t1_; }
  double t2() const noexcept { return t2_; }
  std::size_t nodes() const noexcept { return values_.size(); }
  int dim() const noexcept { return static_cast<int>(values_.front().size()); }
  double node_time(std::size_t i) const;
  const std::vector<Vec>& values() const noexcept { return values_; }

  Vec operator()(double t) const;

  ControlSignal operator+(const ControlSignal& o) const;
  ControlSignal operator*(double s) const;

 private:
  void build();

  double t1_, t2_, h_;
  std::vector<Vec> values_;
  std::vector<Vec> slopes_;
};

struct SolveTolerances {
  double tol = 1e-10;
};

double hamiltonian(const ControlProblem& P, double t, const Vec& q,
                   const Vec& u, const Vec& p);
Vec hamiltonian_du(const ControlProblem& P, double t, const Vec& q,
                   const Vec& u, const Vec& p);
double hamiltonian_dt(const ControlProblem& P, double t, const Vec& q,
                      const Vec& u, const Vec& p);

// Augmented state [q; int_t1^t L]; the last component at t2 is I[u].
struct ForwardSolution {
  DenseSolution dense;
  int state_dim;
  Vec q(double t) const { return dense(t).head(state_dim); }
  double cost() const { return dense(dense.t_end())[state_dim]; }
};

ForwardSolution forward_state(const ControlProblem& P, const ControlSignal& u,
                              const SolveTolerances& tol = {});
// Backward solve of p' = -dL/dq - (dphi/dq)^T p, p(t2) = 0.
DenseSolution adjoint_state(const ControlProblem& P, const ControlSignal& u,
                            const ForwardSolution& q,
                            const SolveTolerances& tol = {});
// qbar' = dphi/dq qbar + dphi/du ubar, qbar(t1) = 0.
DenseSolution linearized_state(const ControlProblem& P, const ControlSignal& u,
                               const ForwardSolution& q,
                               const ControlSignal& ubar,
                               const SolveTolerances& tol = {});

struct FirstVariation {
  double via_linearized;   // int (dL/dq qbar + dL/du ubar)
  double via_hamiltonian;  // int dH/du ubar
};

// Throws ConsistencyError when the two values disagree beyond 1e-4
// relative (with an absolute floor of 1e-9).
FirstVariation control_first_variation(const ControlProblem& P,
                                       const ControlSignal& u,
                                       const ControlSignal& ubar,
                                       const SolveTolerances& tol = {});

struct SweepOptions {
  double alpha = 0.5;
  int max_iter = 200;
  double grad_tol = 1e-6;
  bool backtracking = true;
  SolveTolerances tol{};
};

struct SweepState {
  ControlSignal u;
  ForwardSolution q;
  DenseSolution p;
  double grad_norm;  // max over nodes of |dH/du|
  double cost;
  int iteration;
  double alpha;  // step in effect at termination
  std::vector<double> cost_history;
};

// Steepest descent u <- u - alpha dH/du until ||dH/du||_0 <= grad_tol.
// Throws StepSizeError after 10 consecutive iterations without decrease.
SweepState solve_wps(const ControlProblem& P, const ControlSignal& u0,
                     const SweepOptions& opts = {});

struct TimeIdentityReport {
  std::vector<double> times;
  std::vector<double> residual;  // |dH/dt - dH/dt_partial|
  std::vector<double> H;
  double max_residual;
  double scale;  // max |H| + (t2 - t1) max |dH/dt_partial|, floor 1
};

TimeIdentityReport hamiltonian_time_identity(const ControlProblem& P,
                                             const SweepState& s,
                                             std::size_t samples = 201);

struct StabilityReport {
  std::vector<double> h;
  std::vector<double> order1;  // ||q^{u+h ubar} - q^u||_0
  std::vector<double> order2;  // ||q^{u+h ubar} - q^u - h qbar||_0
  double order1_ratio_spread;  // max(order1/h) / min(order1/h)
  double order2_slope;         // least-squares log-log slope
};

StabilityReport stability_orders(const ControlProblem& P,
                                 const ControlSignal& u,
                                 const ControlSignal& ubar,
                                 const std::vector<double>& hs,
                                 const SolveTolerances& tol = {1e-12},
                                 std::size_t samples = 401);

struct LipschitzReport {
  double L_u;  // max ||dphi/dq|| along (t, q^u(t), u(t))
  bool warn;   // (t2 - t1) L_u >= 1
};

LipschitzReport lipschitz_constant(const ControlProblem& P,
                                   const ControlSignal& u,
                                   const ForwardSolution& q,
                                   std::size_t samples = 401);

}  // namespace gsfcv
