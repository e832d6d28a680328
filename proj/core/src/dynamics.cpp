#include "gsfcv/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include <Eigen/Dense>

#include "gsfcv/calculus.hpp"
#include "gsfcv/error.hpp"

namespace gsfcv {

const char* to_string(SystemKind k) noexcept {
  switch (k) {
    case SystemKind::pendulum: return "pendulum";
    case SystemKind::damped_two_media: return "damped_two_media";
    case SystemKind::pais_uhlenbeck: return "pais_uhlenbeck";
  }
  return "?";
}

SystemKind system_kind_from_string(const std::string& s) {
  if (s == "pendulum") return SystemKind::pendulum;
  if (s == "damped_two_media" || s == "damped") return SystemKind::damped_two_media;
  if (s == "pais_uhlenbeck" || s == "pu") return SystemKind::pais_uhlenbeck;
  throw ValidationError("unknown system '" + s + "'");
}

SystemSpec::SystemSpec(SystemKind kind, SystemParams params, Mollifier mollifier)
    : kind_(kind), p_(params), m_(std::move(mollifier)) {
  auto pos = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ValidationError(std::string("parameter ") + name + " must be positive");
  };
  pos(p_.m, "m");
  switch (kind_) {
    case SystemKind::pendulum:
      pos(p_.L1, "L1");
      pos(p_.L2, "L2");
      pos(p_.g, "g");
      break;
    case SystemKind::damped_two_media:
      pos(p_.Lambda, "Lambda");
      pos(p_.g, "g");
      pos(p_.theta0, "theta0");
      if (!(p_.beta1 >= 0.0) || !(p_.beta2 >= 0.0))
        throw ValidationError("damping coefficients must be non-negative");
      break;
    case SystemKind::pais_uhlenbeck:
      pos(p_.w1, "w1");
      pos(p_.w2, "w2");
      pos(p_.w1hat, "w1hat");
      pos(p_.w2hat, "w2hat");
      break;
  }
  if (!std::isfinite(p_.theta0) || !std::isfinite(p_.ts))
    throw ValidationError("layer locations must be finite");
}

std::vector<double> SystemSpec::layers() const {
  switch (kind_) {
    case SystemKind::pendulum: return {p_.theta0};
    case SystemKind::damped_two_media: return {-p_.theta0, p_.theta0};
    case SystemKind::pais_uhlenbeck: return {p_.ts};
  }
  return {};
}

double SystemSpec::layer_distance(double t, double q) const {
  const double x = layers_in_time() ? t : q;
  double d = std::numeric_limits<double>::infinity();
  for (double c : layers()) d = std::min(d, std::abs(x - c));
  return d;
}

double pendulum_length(const SystemSpec& s, double eps, double theta) {
  const auto& p = s.params();
  return heaviside_at(s.mollifier(), eps, p.theta0 - theta) * p.L1 + p.L2;
}

double pendulum_length_derivative(const SystemSpec& s, double eps,
                                  double theta) {
  const auto& p = s.params();
  return -delta_at(s.mollifier(), eps, p.theta0 - theta) * p.L1;
}

double damping(const SystemSpec& s, double eps, double theta) {
  const auto& p = s.params();
  const auto& m = s.mollifier();
  return p.beta1 + (heaviside_at(m, eps, theta + p.theta0) -
                    heaviside_at(m, eps, theta - p.theta0)) *
                       (p.beta2 - p.beta1);
}

PuFrequencies pu_frequencies(const SystemSpec& s, double eps, double t) {
  const auto& p = s.params();
  const double H = heaviside_at(s.mollifier(), eps, p.ts - t);
  const double D = delta_at(s.mollifier(), eps, p.ts - t);
  return {p.w1 + H * (p.w1hat - p.w1), p.w2 + H * (p.w2hat - p.w2),
          -D * (p.w1hat - p.w1), -D * (p.w2hat - p.w2)};
}

double pendulum_rhs(const SystemSpec& s, double eps, double, double theta,
                    double dtheta) {
  const auto& p = s.params();
  const double L = pendulum_length(s, eps, theta);
  if (!(L > 0.0))
    throw InvalidStateError("pendulum length is not positive at theta = " +
                            std::to_string(theta));
  const double dL = pendulum_length_derivative(s, eps, theta);
  const double w2 = dtheta * dtheta;
  return (w2 * L * dL + p.g * dL * (std::cos(theta) - std::cos(p.theta0)) -
          p.g * L * std::sin(theta) - 2.0 * w2 * L * dL) /
         (L * L);
}

double damped_rhs(const SystemSpec& s, double eps, double, double theta,
                  double dtheta) {
  const auto& p = s.params();
  return -2.0 * damping(s, eps, theta) * dtheta -
         p.g * std::sin(theta) / p.Lambda;
}

double pu_rhs(const SystemSpec& s, double eps, double t, double q, double dq,
              double d2q, double) {
  const auto w = pu_frequencies(s, eps, t);
  const double S = w.w1 * w.w1 + w.w2 * w.w2;
  const double P = w.w1 * w.w1 * w.w2 * w.w2;
  return -S * d2q - 2.0 * (w.w1 * w.dw1 + w.w2 * w.dw2) * dq - P * q;
}

double system_rhs(const SystemSpec& s, double eps, double t, const State& y) {
  switch (s.kind()) {
    case SystemKind::pendulum: return pendulum_rhs(s, eps, t, y[0], y[1]);
    case SystemKind::damped_two_media: return damped_rhs(s, eps, t, y[0], y[1]);
    case SystemKind::pais_uhlenbeck:
      return pu_rhs(s, eps, t, y[0], y[1], y[2], y[3]);
  }
  return 0.0;
}

double energy(const SystemSpec& s, double eps, const State& y, double t) {
  const auto& p = s.params();
  switch (s.kind()) {
    case SystemKind::pendulum: {
      const double L = pendulum_length(s, eps, y[0]);
      const double H = heaviside_at(s.mollifier(), eps, p.theta0 - y[0]);
      return 0.5 * p.m * y[1] * y[1] * L * L - p.m * p.g * L * std::cos(y[0]) -
             p.m * p.g * (1.0 - H) * p.L1 * std::cos(p.theta0);
    }
    case SystemKind::pais_uhlenbeck: {
      const auto w = pu_frequencies(s, eps, t);
      const double S = w.w1 * w.w1 + w.w2 * w.w2;
      const double P = w.w1 * w.w1 * w.w2 * w.w2;
      return 0.5 * p.m *
             (2.0 * y[1] * y[3] - y[2] * y[2] + S * y[1] * y[1] + P * y[0] * y[0]);
    }
    case SystemKind::damped_two_media:
      break;
  }
  throw CapabilityError("the damped system has no conserved energy");
}

// --- Trajectory -------------------------------------------------------------

std::vector<double> Trajectory::layer_crossings() const {
  std::vector<double> t;
  for (const auto& e : sol_.events()) t.push_back(e.t);
  return t;
}

bool Trajectory::near_layer(double t, double margin) const {
  const double tc = std::clamp(t, t1_, t2_);
  return spec_.layer_distance(tc, sol_(tc)[0]) < margin;
}

double Trajectory::derivative(double t, int k) const {
  const int n = spec_.order();
  if (k < 0) throw ValidationError("negative derivative order");
  if (k < n) return sol_(t)[k];
  auto rhs = [this](double s) { return system_rhs(spec_, eps_, s, sol_(s)); };
  if (k == n) return rhs(t);
  return stencil_derivative(rhs, t, k - n, 1e-3 * (t2_ - t1_), t1_, t2_);
}

Path Trajectory::as_path(int max_order) const {
  auto self = std::make_shared<const Trajectory>(*this);
  Path p = Path::scalar(t1_, t2_, max_order,
                        [self](double t, int k) { return self->derivative(t, k); });
  p.with_breakpoints(layer_crossings());
  p.with_layer_test(
      [self](double t, double margin) { return self->near_layer(t, margin); });
  return p;
}

Trajectory integrate(const SystemSpec& s, double eps, const State& ic,
                     double t1, double t2, const IntegrateOptions& opts) {
  if (ic.size() != s.order())
    throw ValidationError("initial condition length " +
                          std::to_string(ic.size()) + " does not match order " +
                          std::to_string(s.order()));
  if (!(t2 > t1)) throw ValidationError("t_span must be increasing");
  if (!(opts.tol > 0.0)) throw ValidationError("tol must be positive");

  Trajectory tr(s);
  tr.eps_ = eps;
  tr.t1_ = t1;
  tr.t2_ = t2;
  tr.b_ = s.mollifier().b(eps);
  const double b = tr.b_;

  OdeOptions oo;
  oo.rtol = opts.tol;
  oo.atol = opts.tol;
  const int n = s.order();
  OdeRhs f = [&s, eps, n](double t, const State& y, State& dy) {
    for (int i = 0; i + 1 < n; ++i) dy[i] = y[i + 1];
    dy[n - 1] = system_rhs(s, eps, t, y);
  };
  oo.step_cap = [&s, b](double t, const State& y) {
    return s.layer_distance(t, y[0]) < 4.0 / b
               ? 0.2 / b
               : std::numeric_limits<double>::infinity();
  };
  if (opts.layer_events) {
    for (double c : s.layers())
      for (double side : {-1.0, 1.0}) {
        const double edge = c + side / b;
        if (s.layers_in_time())
          oo.events.push_back([edge](double t, const State&) { return t - edge; });
        else
          oo.events.push_back([edge](double, const State& y) { return y[0] - edge; });
      }
  }
  tr.sol_ = integrate_dop853(f, t1, ic, t2, oo);

  const double stride = opts.monitor_stride > 0.0 ? opts.monitor_stride
                                                  : 1e-3 * (t2 - t1);
  const auto N = static_cast<std::size_t>(std::llround((t2 - t1) / stride));
  const std::size_t nodes = std::max<std::size_t>(N, 1) + 1;
  const bool has_energy = s.kind() != SystemKind::damped_two_media;
  tr.times_.reserve(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double t = i + 1 == nodes
                         ? t2
                         : t1 + (t2 - t1) * static_cast<double>(i) /
                                    static_cast<double>(nodes - 1);
    State y = tr.sol_(t);
    tr.times_.push_back(t);
    tr.rhs_.push_back(system_rhs(s, eps, t, y));
    if (has_energy) tr.energy_.push_back(energy(s, eps, y, t));
    tr.states_.push_back(std::move(y));
  }
  return tr;
}

// --- Closed forms -----------------------------------------------------------

double PuAnalytic::operator()(double t, int k) const {
  auto term = [&](double A, double w, double phi) {
    return A * std::pow(w, k) * std::sin(w * t + phi + k * std::numbers::pi / 2);
  };
  return term(A1, w1, phi1) + term(A2, w2, phi2);
}

PuAnalytic pu_analytic(double w1, double w2, const std::array<double, 4>& ic,
                       double t0) {
  if (!(w1 > 0.0) || !(w2 > 0.0))
    throw ValidationError("PU frequencies must be positive");
  if (std::abs(w1 - w2) <= 1e-12 * std::max(w1, w2))
    throw DegeneracyError("PU fit needs distinct frequencies");
  // Unknowns: coefficients of sin(w1 t), cos(w1 t), sin(w2 t), cos(w2 t).
  Eigen::Matrix4d M;
  for (int k = 0; k < 4; ++k) {
    const double sh = k * std::numbers::pi / 2;
    const double p1 = std::pow(w1, k), p2 = std::pow(w2, k);
    M(k, 0) = p1 * std::sin(w1 * t0 + sh);
    M(k, 1) = p1 * std::cos(w1 * t0 + sh);
    M(k, 2) = p2 * std::sin(w2 * t0 + sh);
    M(k, 3) = p2 * std::cos(w2 * t0 + sh);
  }
  const Eigen::Vector4d rhs(ic[0], ic[1], ic[2], ic[3]);
  Eigen::FullPivLU<Eigen::Matrix4d> lu(M);
  if (!lu.isInvertible()) throw DegeneracyError("singular PU fit");
  const Eigen::Vector4d c = lu.solve(rhs);
  auto phase = [](double beta, double alpha) {
    if (alpha == 0.0 && beta == 0.0) return 0.0;
    double ph = std::atan2(beta, alpha);
    if (ph <= -std::numbers::pi) ph += 2.0 * std::numbers::pi;
    return ph;
  };
  PuAnalytic r;
  r.w1 = w1;
  r.w2 = w2;
  r.t0 = t0;
  r.A1 = std::hypot(c[0], c[1]);
  r.phi1 = phase(c[1], c[0]);
  r.A2 = std::hypot(c[2], c[3]);
  r.phi2 = phase(c[3], c[2]);
  return r;
}

double SmallOscillation::operator()(double t) const {
  const double x = omega * (t - t_anchor);
  return theta_anchor * std::cos(x) + dtheta_anchor / omega * std::sin(x);
}

double SmallOscillation::derivative(double t) const {
  const double x = omega * (t - t_anchor);
  return -theta_anchor * omega * std::sin(x) + dtheta_anchor * std::cos(x);
}

SmallOscillation small_oscillation_reference(const SystemSpec& s,
                                             OscillationSide side,
                                             double t_anchor,
                                             double theta_anchor,
                                             double dtheta_anchor) {
  if (s.kind() != SystemKind::pendulum)
    throw CapabilityError("small oscillations are defined for the pendulum");
  const auto& p = s.params();
  const double omega = side == OscillationSide::below
                           ? std::sqrt(p.g / (p.L1 + p.L2))
                           : std::sqrt(p.g / p.L2);
  return {side, omega, t_anchor, theta_anchor, dtheta_anchor};
}

double joined_small_oscillation(const SmallOscillation& below,
                                const SmallOscillation& above, double t2,
                                const Mollifier* m, double eps, double t) {
  const double H = (m && eps > 0.0) ? heaviside_at(*m, eps, t - t2)
                                    : (t > t2 ? 1.0 : (t < t2 ? 0.0 : 0.5));
  return below(t) + H * (above(t) - below(t));
}

// --- Lagrangians ------------------------------------------------------------

Lagrangian system_lagrangian(const SystemSpec& s) {
  const SystemSpec spec = s;
  const auto& p = spec.params();
  auto vec1 = [](double v) {
    Eigen::VectorXd r(1);
    r[0] = v;
    return r;
  };
  switch (s.kind()) {
    case SystemKind::pendulum:
      return Lagrangian(
          1, 1,
          [spec, p](double eps, const Jet& j) {
            const double th = j.q[0][0], w = j.q[1][0];
            const double L = pendulum_length(spec, eps, th);
            const double H = heaviside_at(spec.mollifier(), eps, p.theta0 - th);
            return 0.5 * p.m * L * L * w * w + p.m * p.g * L * std::cos(th) +
                   p.m * p.g * p.L1 * std::cos(p.theta0) * (1.0 - H);
          },
          [spec, p, vec1](double eps, const Jet& j, int i) {
            const double th = j.q[0][0], w = j.q[1][0];
            const double L = pendulum_length(spec, eps, th);
            if (i == 1) return vec1(p.m * L * L * w);
            const double dL = pendulum_length_derivative(spec, eps, th);
            return vec1(p.m * L * dL * w * w +
                        p.m * p.g * dL * (std::cos(th) - std::cos(p.theta0)) -
                        p.m * p.g * L * std::sin(th));
          },
          {}, true);
    case SystemKind::damped_two_media:
      return Lagrangian(
          1, 1,
          [p](double, const Jet& j) {
            const double th = j.q[0][0], w = j.q[1][0];
            return 0.5 * p.m * p.Lambda * p.Lambda * w * w +
                   p.m * p.g * p.Lambda * std::cos(th);
          },
          [p, vec1](double, const Jet& j, int i) {
            if (i == 1) return vec1(p.m * p.Lambda * p.Lambda * j.q[1][0]);
            return vec1(-p.m * p.g * p.Lambda * std::sin(j.q[0][0]));
          },
          {}, true);
    case SystemKind::pais_uhlenbeck:
      return Lagrangian(
          2, 1,
          [spec, p](double eps, const Jet& j) {
            const auto w = pu_frequencies(spec, eps, j.t);
            const double S = w.w1 * w.w1 + w.w2 * w.w2;
            const double P = w.w1 * w.w1 * w.w2 * w.w2;
            const double q = j.q[0][0], dq = j.q[1][0], d2q = j.q[2][0];
            return 0.5 * p.m * (d2q * d2q - S * dq * dq + P * q * q);
          },
          [spec, p, vec1](double eps, const Jet& j, int i) {
            const auto w = pu_frequencies(spec, eps, j.t);
            const double S = w.w1 * w.w1 + w.w2 * w.w2;
            const double P = w.w1 * w.w1 * w.w2 * w.w2;
            switch (i) {
              case 0: return vec1(p.m * P * j.q[0][0]);
              case 1: return vec1(-p.m * S * j.q[1][0]);
              default: return vec1(p.m * j.q[2][0]);
            }
          },
          [spec, p](double eps, const Jet& j) {
            const auto w = pu_frequencies(spec, eps, j.t);
            const double dS = 2.0 * (w.w1 * w.dw1 + w.w2 * w.dw2);
            const double dP = 2.0 * w.w1 * w.dw1 * w.w2 * w.w2 +
                              2.0 * w.w2 * w.dw2 * w.w1 * w.w1;
            const double q = j.q[0][0], dq = j.q[1][0];
            return 0.5 * p.m * (-dS * dq * dq + dP * q * q);
          },
          false);
  }
  throw CapabilityError("no Lagrangian for this system");
}

GeneralizedForce damped_force(const SystemSpec& s) {
  if (s.kind() != SystemKind::damped_two_media)
    throw CapabilityError("generalized force is defined for the damped system");
  const SystemSpec spec = s;
  return [spec](double eps, const Jet& j) {
    const auto& p = spec.params();
    const double r = 2.0 * p.m * damping(spec, eps, j.q[0][0]);
    Eigen::VectorXd Q(1);
    Q[0] = -r * p.Lambda * p.Lambda * j.q[1][0];
    return Q;
  };
}

}  // namespace gsfcv
