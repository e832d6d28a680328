#pragma once

// The singular mechanical systems: variable-length pendulum, damped
// pendulum crossing two media, and the Pais-Uhlenbeck oscillator with
// switched frequencies. Integration per eps with layer-aware stepping.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gsfcv/mollifier.hpp"
#include "gsfcv/ode.hpp"
#include "gsfcv/variational.hpp"

namespace gsfcv {

enum class SystemKind { pendulum, damped_two_media, pais_uhlenbeck };

const char* to_string(SystemKind k) noexcept;
SystemKind system_kind_from_string(const std::string& s);

struct SystemParams {
  double L1 = 0.4;
  double L2 = 0.2;
  double g = 9.8;
  double theta0 = 0.07853981633974483;  // pi / 40
  double beta1 = 0.0064;
  double beta2 = 0.3859;
  double Lambda = 0.6;
  double m = 1.0;
  double ts = 15.0;
  double w1 = 0.5;
  double w1hat = 0.7;
  double w2 = 1.0;
  double w2hat = 1.2;
};

class SystemSpec {
 public:
  SystemSpec(SystemKind kind, SystemParams params, Mollifier mollifier);

  SystemKind kind() const noexcept { return kind_; }
  int order() const noexcept { return kind_ == SystemKind::pais_uhlenbeck ? 4 : 2; }
  const SystemParams& params() const noexcept { return p_; }
  const Mollifier& mollifier() const noexcept { return m_; }
  // theta0 (pendulum), -theta0 and +theta0 (damped), ts (PU).
  std::vector<double> layers() const;
  // Whether layers live in t (PU) or in the configuration variable.
  bool layers_in_time() const noexcept {
    return kind_ == SystemKind::pais_uhlenbeck;
  }
  // Distance from the nearest layer in the layer variable.
  double layer_distance(double t, double q) const;

 private:
  SystemKind kind_;
  SystemParams p_;
  Mollifier m_;
};

// Lambda(theta) = H(theta0 - theta) L1 + L2 and its theta derivative.
double pendulum_length(const SystemSpec& s, double eps, double theta);
double pendulum_length_derivative(const SystemSpec& s, double eps, double theta);
double damping(const SystemSpec& s, double eps, double theta);

struct PuFrequencies {
  double w1, w2, dw1, dw2;
};
PuFrequencies pu_frequencies(const SystemSpec& s, double eps, double t);

double pendulum_rhs(const SystemSpec& s, double eps, double t, double theta,
                    double dtheta);
double damped_rhs(const SystemSpec& s, double eps, double t, double theta,
                  double dtheta);
double pu_rhs(const SystemSpec& s, double eps, double t, double q, double dq,
              double d2q, double d3q);
// Highest derivative for any system.
double system_rhs(const SystemSpec& s, double eps, double t, const State& y);

// Pendulum (e1k-type) and PU energies; throws CapabilityError for the
// damped system.
double energy(const SystemSpec& s, double eps, const State& y, double t);

struct IntegrateOptions {
  double tol = 1e-10;
  // Monitor stride; 0 means 1e-3 (t2 - t1).
  double monitor_stride = 0.0;
  bool layer_events = true;
};

class Trajectory {
 public:
  double eps() const noexcept { return eps_; }
  const SystemSpec& spec() const noexcept { return spec_; }
  double t1() const noexcept { return t1_; }
  double t2() const noexcept { return t2_; }
  double b() const noexcept { return b_; }

  // Uniform monitor nodes.
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<State>& states() const noexcept { return states_; }
  const std::vector<double>& rhs_values() const noexcept { return rhs_; }
  // Empty for the damped system.
  const std::vector<double>& energy() const noexcept { return energy_; }

  const DenseSolution& dense() const noexcept { return sol_; }
  State state(double t) const { return sol_(t); }
  // Times at which the solution entered or left a layer.
  std::vector<double> layer_crossings() const;
  // Whether (t, q(t)) lies within margin of a layer.
  bool near_layer(double t, double margin) const;

  // q^(k)(t): state for k < order, RHS for k = order, stencil derivatives
  // of the RHS along the dense output above that.
  double derivative(double t, int k) const;
  Path as_path(int max_order) const;

 private:
  friend Trajectory integrate(const SystemSpec&, double, const State&, double,
                              double, const IntegrateOptions&);
  Trajectory(SystemSpec spec) : spec_(std::move(spec)) {}

  SystemSpec spec_;
  double eps_ = 0.0, t1_ = 0.0, t2_ = 0.0, b_ = 0.0;
  DenseSolution sol_;
  std::vector<double> times_;
  std::vector<State> states_;
  std::vector<double> rhs_;
  std::vector<double> energy_;
};

Trajectory integrate(const SystemSpec& s, double eps, const State& ic,
                     double t1, double t2, const IntegrateOptions& opts = {});

// Constant-frequency PU solution A1 sin(w1 t + phi1) + A2 sin(w2 t + phi2),
// fitted to (q, q', q'', q''') at t0.
struct PuAnalytic {
  double w1, w2, t0;
  double A1, phi1, A2, phi2;
  double operator()(double t, int k = 0) const;
};
PuAnalytic pu_analytic(double w1, double w2, const std::array<double, 4>& ic,
                       double t0 = 0.0);

enum class OscillationSide { below, above };

// Linearized pendulum about theta = 0 on one side of the layer.
struct SmallOscillation {
  OscillationSide side;
  double omega;
  double t_anchor, theta_anchor, dtheta_anchor;
  double operator()(double t) const;
  double derivative(double t) const;
};
SmallOscillation small_oscillation_reference(const SystemSpec& s,
                                             OscillationSide side,
                                             double t_anchor,
                                             double theta_anchor,
                                             double dtheta_anchor = 0.0);
// below + H(t - t2)(above - below); sharp switch when eps <= 0.
double joined_small_oscillation(const SmallOscillation& below,
                                const SmallOscillation& above, double t2,
                                const Mollifier* m, double eps, double t);

// Lagrangians whose Euler-Lagrange (or D'Alembert) equations are the system
// equations; the damped one pairs with damped_force.
Lagrangian system_lagrangian(const SystemSpec& s);
GeneralizedForce damped_force(const SystemSpec& s);

}  // namespace gsfcv
