#pragma once

// Higher-order variational calculus along sampled paths: action, first and
// second variation, Euler-Lagrange residual, the phi^j momenta, the
// du Bois-Reymond identity, generalized forces and Noether constants.
//
// Slot convention: d_1 L is the time partial, d_{i+2} L the partial with
// respect to q^(i), i = 0..m.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gsfcv {

struct Jet {
  double t = 0.0;
  std::vector<Eigen::VectorXd> q;  // q[i] = q^(i)
};

class Lagrangian {
 public:
  using Fn = std::function<double(double eps, const Jet&)>;
  // Partial with respect to q^(i) (slot i + 2).
  using Partial = std::function<Eigen::VectorXd(double eps, const Jet&, int i)>;
  using TimePartial = std::function<double(double eps, const Jet&)>;

  // Missing partials fall back to central differences of L.
  Lagrangian(int order, int dim, Fn L, Partial partial = {},
             TimePartial time_partial = {}, bool autonomous = false);

  int order() const noexcept { return m_; }
  int dim() const noexcept { return d_; }
  bool autonomous() const noexcept { return autonomous_; }
  bool has_analytic_partials() const noexcept { return bool(partial_); }

  double operator()(double eps, const Jet& j) const { return L_(eps, j); }
  Eigen::VectorXd partial(double eps, const Jet& j, int i) const;
  double time_partial(double eps, const Jet& j) const;

  // Compares supplied partials against central differences at random probe
  // jets with entries in [-range, range]. Throws ConsistencyError.
  void validate_partials(double eps, std::uint64_t seed, int probes = 8,
                         double rel_tol = 1e-5, double range = 1.0) const;

 private:
  int m_;
  int d_;
  Fn L_;
  Partial partial_;
  TimePartial time_partial_;
  bool autonomous_;
};

// A path t -> q(t) with derivative access up to max_order.
class Path {
 public:
  using Derivative = std::function<Eigen::VectorXd(double t, int k)>;

  Path(int dim, int max_order, double t1, double t2, Derivative d);

  static Path scalar(double t1, double t2, int max_order,
                     std::function<double(double t, int k)> d);
  // q + s h on the common interval.
  static Path perturbed(const Path& q, const Path& h, double s);

  int dim() const noexcept { return dim_; }
  int max_order() const noexcept { return max_order_; }
  double t1() const noexcept { return t1_; }
  double t2() const noexcept { return t2_; }

  Eigen::VectorXd operator()(double t, int k = 0) const;
  Jet jet(double t, int m) const;

  // Times where the integrand of the action varies steeply.
  Path& with_breakpoints(std::vector<double> bp);
  std::span<const double> breakpoints() const noexcept { return bp_; }
  // Layer proximity test supplied by the producer of the path.
  Path& with_layer_test(std::function<bool(double t, double margin)> near);
  bool near_layer(double t, double margin) const {
    return near_ ? near_(t, margin) : false;
  }

 private:
  int dim_;
  int max_order_;
  double t1_, t2_;
  Derivative d_;
  std::vector<double> bp_;
  std::function<bool(double, double)> near_;
};

struct VariationalOptions {
  double quad_tol = 1e-10;
  // Time-derivative stencil spacing; 0 means 1e-3 (t2 - t1).
  double fd_spacing = 0.0;
};

using GeneralizedForce = std::function<Eigen::VectorXd(double eps, const Jet&)>;

struct Symmetry {
  std::function<double(double t)> tau_s;                           // dtau/ds(0, t)
  std::function<Eigen::VectorXd(const Eigen::VectorXd& q)> sigma_s;  // dsigma/ds(0, q)
  std::string description;

  static Symmetry time_translation(int dim);
  static Symmetry space_translation(int dim);
};

struct VariationReport {
  double value;
  std::string direction;
  double quadrature_tol;
};

double action(const Lagrangian& L, const Path& q, double eps,
              const VariationalOptions& opts = {});

// int sum_i d_{i+2}L h^(i) dt. h^(i) must vanish at both ends for i < m.
VariationReport first_variation(const Lagrangian& L, const Path& q,
                                const Path& h, double eps,
                                const VariationalOptions& opts = {});
// (J(q+sh) - J(q-sh)) / 2s, integrated as one integrand.
VariationReport first_variation_fd(const Lagrangian& L, const Path& q,
                                   const Path& h, double eps, double s = 1e-5,
                                   const VariationalOptions& opts = {});
// (J(q+sh) - 2J(q) + J(q-sh)) / s^2, integrated as one integrand.
VariationReport second_variation(const Lagrangian& L, const Path& q,
                                 const Path& h, double eps, double s = 1e-4,
                                 const VariationalOptions& opts = {});

// sum_{i=0}^m (-1)^i d^i/dt^i d_{i+2}L along q.
Eigen::VectorXd el_residual(const Lagrangian& L, const Path& q, double eps,
                            double t, const VariationalOptions& opts = {});
// phi^j for j = 0..m; phi^0 is the Euler-Lagrange expression.
std::vector<Eigen::VectorXd> phi_operators(const Lagrangian& L, const Path& q,
                                           double eps, double t,
                                           const VariationalOptions& opts = {});
// Max over j = 1..m of |d/dt phi^j - d_{j+1}L + phi^{j-1}|.
double phi_recurrence_residual(const Lagrangian& L, const Path& q, double eps,
                               double t, const VariationalOptions& opts = {});
// d/dt (L - sum_j phi^j . q^(j)) - d_1 L.
double dbr_residual(const Lagrangian& L, const Path& q, double eps, double t,
                    const VariationalOptions& opts = {});
// dbr_residual + Q . qdot: zero along forced motions.
double dbr_residual(const Lagrangian& L, const GeneralizedForce& Q,
                    const Path& q, double eps, double t,
                    const VariationalOptions& opts = {});
// el_residual + Q: zero along motions of d/dt dL/dqdot - dL/dq = Q.
Eigen::VectorXd dalembert_residual(const Lagrangian& L,
                                   const GeneralizedForce& Q, const Path& q,
                                   double eps, double t,
                                   const VariationalOptions& opts = {});
double noether_constant(const Lagrangian& L, const Path& q,
                        const Symmetry& sym, double eps, double t,
                        const VariationalOptions& opts = {});

// h_k(t) = sin(k pi (t - t1)/(t2 - t1)) w(t)^m with
// w(t) = 4 (t - t1)(t2 - t)/(t2 - t1)^2; analytic derivatives to max_order.
Path test_direction(double t1, double t2, int k, int m, int max_order);

}  // namespace gsfcv
