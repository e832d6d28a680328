#include "gsfcv_cli/experiments.hpp"

#include <cmath>

#include <json.hpp>

#include <gsfcv/dynamics.hpp>
#include <gsfcv/error.hpp>
#include <gsfcv/gauge.hpp>
#include <gsfcv/mollifier.hpp>
#include <gsfcv/optctrl.hpp>
#include <gsfcv/version.hpp>

#include "gsfcv_cli/analysis.hpp"
#include "gsfcv_cli/io.hpp"

namespace gsfcv::cli {

using json = nlohmann::ordered_json;

const std::string* ArtifactSet::find(const std::string& name) const {
  for (const auto& [n, bytes] : files)
    if (n == name) return &bytes;
  return nullptr;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string dump(const json& j) { return j.dump(2) + "\n"; }

Mollifier make_mollifier(const GaugeSection& g, const MollifierSection& m) {
  return Mollifier::build(m.moment_order, m.scale_exponent, g.kind);
}

State initial_state(const std::vector<double>& ic) {
  State y(static_cast<Eigen::Index>(ic.size()));
  for (std::size_t i = 0; i < ic.size(); ++i) y[static_cast<Eigen::Index>(i)] = ic[i];
  return y;
}

std::vector<std::string> trajectory_header(const SystemSpec& s) {
  std::vector<std::string> h = {"t", "eps", "q0", "q1"};
  if (s.order() == 4) h.insert(h.end(), {"q2", "q3"});
  h.insert(h.end(), {"rhs", "energy"});
  return h;
}

void append_trajectory(CsvTable& csv, const Trajectory& tr) {
  const bool has_energy = !tr.energy().empty();
  for (std::size_t i = 0; i < tr.times().size(); ++i) {
    std::vector<double> row = {tr.times()[i], tr.eps()};
    for (Eigen::Index k = 0; k < tr.states()[i].size(); ++k) row.push_back(tr.states()[i][k]);
    row.push_back(tr.rhs_values()[i]);
    row.push_back(has_energy ? tr.energy()[i] : kNaN);
    csv.row(row);
  }
}

std::vector<Trajectory> sweep(const SystemSpec& s, const Gauge& g,
                              const State& ic, double t1, double t2, double tol) {
  IntegrateOptions o;
  o.tol = tol;
  return parallel_map<Trajectory>(g.size(), [&](std::size_t i) {
    return integrate(s, g.eps(i), ic, t1, t2, o);
  });
}

json fit_json(const PuAnalytic& f) {
  return json{{"w1", f.w1}, {"w2", f.w2}, {"t0", f.t0}, {"A1", f.A1},
              {"phi1", f.phi1}, {"A2", f.A2}, {"phi2", f.phi2}};
}

ArtifactSet trajectory_experiment(const ExperimentConfig& c) {
  ArtifactSet out;
  const Gauge g = c.gauge.make();
  const SystemSpec spec(c.system, c.params, make_mollifier(c.gauge, c.mollifier));
  const State ic = initial_state(c.ic);
  const auto runs = sweep(spec, g, ic, c.t1, c.t2, c.tol);

  CsvTable traj(trajectory_header(spec));
  for (const auto& tr : runs) append_trajectory(traj, tr);
  out.add("trajectory.csv", traj.text());

  json summary = json::array();
  for (const auto& tr : runs) {
    json e{{"eps", tr.eps()},
           {"b", tr.b()},
           {"accepted_steps", tr.dense().accepted_steps()},
           {"layer_events", tr.layer_crossings().size()}};
    const Transit w = first_transit(tr);
    e["peak_abs_highest_derivative"] = peak_highest_derivative(tr, w);
    if (spec.kind() == SystemKind::pendulum) {
      const EnergyDrift d = energy_drift(tr);
      double far = 0.0, cross = 0.0;
      for (double v : d.far) far = std::max(far, v);
      for (double v : d.crossing) cross = std::max(cross, v);
      e["max_far_energy_drift"] = far;
      e["max_crossing_energy_drift"] = cross;
    }
    summary.push_back(e);
  }

  if (spec.kind() == SystemKind::damped_two_media) {
    SystemParams ref = c.params;
    ref.beta2 = ref.beta1;
    const SystemSpec rspec(c.system, ref, spec.mollifier());
    const auto refs = sweep(rspec, g, ic, c.t1, c.t2, c.tol);
    CsvTable rt(trajectory_header(rspec));
    for (const auto& tr : refs) append_trajectory(rt, tr);
    out.add("reference.csv", rt.text());

    CsvTable jumps({"t", "eps", "dtheta", "expected", "extrapolated", "raw", "resolved"});
    for (const auto& tr : runs)
      for (const auto& j : damped_jumps(tr))
        jumps.row({j.t, tr.eps(), j.dtheta, j.expected, j.extrapolated, j.raw,
                   j.resolved ? 1.0 : 0.0});
    out.add("jumps.csv", jumps.text());
  }

  if (spec.kind() == SystemKind::pais_uhlenbeck) {
    CsvTable en({"t", "eps", "energy"});
    for (const auto& tr : runs)
      for (std::size_t i = 0; i < tr.times().size(); ++i)
        en.row({tr.times()[i], tr.eps(), tr.energy()[i]});
    out.add("energy.csv", en.text());

    const auto& p = c.params;
    std::array<double, 4> a{c.ic[0], c.ic[1], c.ic[2], c.ic[3]};
    json fit{{"initial", fit_json(pu_analytic(p.w1hat, p.w2hat, a, c.t1))},
             {"initial_primed", fit_json(pu_analytic(p.w1, p.w2, a, c.t1))},
             {"per_eps", json::array()}};
    for (const auto& tr : runs) {
      if (!(c.t1 < p.ts - 4.0 / tr.b() && p.ts + 4.0 / tr.b() < c.t2)) continue;
      const PuSides sd = pu_sides(tr);
      fit["per_eps"].push_back(json{{"eps", tr.eps()},
                                    {"before", fit_json(sd.before)},
                                    {"after", fit_json(sd.after)},
                                    {"fit_error_before", sd.fit_error_before},
                                    {"fit_error_after", sd.fit_error_after},
                                    {"energy_before", sd.energy_before},
                                    {"energy_after", sd.energy_after},
                                    {"energy_drift_before", sd.drift_before},
                                    {"energy_drift_after", sd.drift_after}});
    }
    out.add("analytic_fit.json", dump(fit));
  }
  out.add("summary.json", dump(summary));
  return out;
}

ArtifactSet variational_experiment(const ExperimentConfig& c) {
  ArtifactSet out;
  const Gauge g = c.gauge.make();
  const SystemSpec spec(c.system, c.params, make_mollifier(c.gauge, c.mollifier));
  system_lagrangian(spec).validate_partials(g.eps(0), c.seed);
  const auto runs = sweep(spec, g, initial_state(c.ic), c.t1, c.t2, c.tol);
  const auto scans = parallel_map<ResidualScan>(
      runs.size(), [&](std::size_t i) { return residual_scan(runs[i]); });

  CsvTable csv({"t", "eps", "el_residual", "dbr_residual", "noether_C"});
  json summary = json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (const auto& r : scans[i].rows) csv.row({r.t, runs[i].eps(), r.el, r.dbr, r.noether});
    double drift = 0.0;
    for (double d : scans[i].noether_drift) drift = std::max(drift, d);
    summary.push_back(json{{"eps", runs[i].eps()},
                           {"samples", scans[i].rows.size()},
                           {"scale", scans[i].scale},
                           {"max_el_residual", scans[i].max_el},
                           {"max_recurrence_residual", scans[i].max_recurrence},
                           {"max_dbr_residual", scans[i].max_dbr},
                           {"max_noether_drift", drift}});
  }
  out.add("residuals.csv", csv.text());
  out.add("summary.json", dump(summary));
  return out;
}

ArtifactSet optctrl_experiment(const ExperimentConfig& c) {
  const auto& k = c.control;
  const ControlProblem P = lqr_problem(k.t1, k.t2, k.q1);
  P.validate_partials(c.seed);
  SweepOptions o;
  o.alpha = k.alpha;
  o.max_iter = k.max_iter;
  o.grad_tol = k.grad_tol;
  o.tol.tol = k.tol;
  const SweepState s =
      solve_wps(P, ControlSignal::constant(k.t1, k.t2, k.nodes, Vec::Zero(1)), o);

  CsvTable csv({"t", "q", "p", "u", "dHdu"});
  double err = 0.0;
  constexpr int kRows = 201;
  for (int i = 0; i < kRows; ++i) {
    const double t = k.t1 + (k.t2 - k.t1) * i / (kRows - 1.0);
    const Vec q = s.q.q(t), p = s.p(t), u = s.u(t);
    csv.row({t, q[0], p[0], u[0], hamiltonian_du(P, t, q, u, p)[0]});
    err = std::max(err, std::abs(u[0] - lqr_optimal_control(t, k.t1, k.t2, k.q1)));
  }
  ArtifactSet out;
  out.add("optimal_control.csv", csv.text());
  out.add("summary.json",
          dump(json{{"iterations", s.iteration},
                    {"grad_norm", s.grad_norm},
                    {"cost", s.cost},
                    {"closed_form_cost", lqr_optimal_cost(k.t1, k.t2, k.q1)},
                    {"max_control_error", err}}));
  return out;
}

ArtifactSet ring_experiment(const ExperimentConfig& c) {
  const GaugePtr g = make_gauge(c.gauge.make());
  const Mollifier m = make_mollifier(c.gauge, c.mollifier);
  const double a = c.mollifier.scale_exponent;
  struct Net {
    const char* name;
    GenNumber value;
  };
  const std::vector<Net> nets = {
      {"rho", GenNumber::sample(g, [](double, double r) { return r; })},
      {"inverse_rho", GenNumber::sample(g, [](double, double r) { return 1.0 / r; })},
      {"one", GenNumber::constant(g, 1.0)},
      {"b", GenNumber::sample(g, [a](double, double r) { return std::pow(r, -a); })},
      {"delta_at_0", GenNumber::sample(g, [&](double e, double) { return delta_at(m, e, 0.0); })},
      {"heaviside_at_0", GenNumber::sample(g, [&](double e, double) { return heaviside_at(m, e, 0.0); })},
      {"rho_plus_rho_squared",
       GenNumber::sample(g, [](double, double r) { return r + r * r; })},
      {"rho_to_30", GenNumber::sample(g, [](double, double r) { return std::pow(r, 30.0); })},
  };
  CsvTable csv({"net", "eps", "value"});
  json summary = json::array();
  for (std::size_t i = 0; i < nets.size(); ++i) {
    const auto& n = nets[i];
    for (std::size_t k = 0; k < n.value.size(); ++k)
      csv.row({static_cast<double>(i), g->eps(k), n.value[k]});
    const AsymptoticClass cls = classify(n.value);
    const PositivityWitness pos = is_strictly_positive(n.value);
    summary.push_back(json{{"net", i},
                           {"name", n.name},
                           {"class", to_string(cls.tag)},
                           {"slope", cls.slope},
                           {"fit_residual", cls.confidence},
                           {"strictly_positive", pos.positive},
                           {"positivity_m", pos.m},
                           {"negligible_order_5", is_negligible_to_order(n.value, 5)}});
  }
  ArtifactSet out;
  out.add("ring.csv", csv.text());
  out.add("ring.json", dump(summary));
  return out;
}

}  // namespace

ArtifactSet embed_profiles(const GaugeSection& gs, const MollifierSection& ms,
                           const ProfileSection& p) {
  const Gauge g = gs.make();
  const Mollifier m = make_mollifier(gs, ms);
  CsvTable delta({"x", "eps", "value"}), heav({"x", "eps", "value"});
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double eps = g.eps(i);
    const double b = m.b(eps);
    for (std::size_t k = 0; k < p.nodes; ++k) {
      const double s = 2 * k + 1 == p.nodes
                           ? 0.0
                           : -p.span + 2.0 * p.span * static_cast<double>(k) /
                                           static_cast<double>(p.nodes - 1);
      const double x = s / b;
      delta.row({x, eps, delta_at(m, eps, x)});
      heav.row({x, eps, heaviside_at(m, eps, x)});
    }
  }
  ArtifactSet out;
  out.add("delta.csv", delta.text());
  out.add("heaviside.csv", heav.text());
  return out;
}

ArtifactSet run_experiment(const ExperimentConfig& c) {
  switch (c.experiment) {
    case Experiment::embed_profiles: return embed_profiles(c.gauge, c.mollifier, c.profile);
    case Experiment::pendulum:
    case Experiment::damped:
    case Experiment::pu: return trajectory_experiment(c);
    case Experiment::variational_checks: return variational_experiment(c);
    case Experiment::optctrl_lqr: return optctrl_experiment(c);
    case Experiment::ring_suite: return ring_experiment(c);
  }
  throw ValidationError("unknown experiment");
}

std::vector<std::filesystem::path> write_artifacts(
    const ArtifactSet& a, const std::filesystem::path& dir,
    const std::string& config_text) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  json files = json::array();
  for (const auto& [name, bytes] : a.files) {
    write_file(dir / name, bytes);
    written.push_back(dir / name);
    files.push_back(json{{"name", name}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
  }
  const json manifest{{"library_version", kVersion},
                      {"config_sha256", sha256_hex(config_text)},
                      {"files", files}};
  write_file(dir / "manifest.json", dump(manifest));
  written.push_back(dir / "manifest.json");
  return written;
}

}  // namespace gsfcv::cli
