#include "gsfcv_cli/config.hpp"

#include <cmath>
#include <set>

#include <yaml-cpp/yaml.h>

#include <gsfcv/error.hpp>

#include "gsfcv_cli/io.hpp"

namespace gsfcv::cli {

const char* to_string(Experiment e) noexcept {
  switch (e) {
    case Experiment::embed_profiles: return "embed_profiles";
    case Experiment::pendulum: return "pendulum";
    case Experiment::damped: return "damped";
    case Experiment::pu: return "pu";
    case Experiment::variational_checks: return "variational_checks";
    case Experiment::optctrl_lqr: return "optctrl_lqr";
    case Experiment::ring_suite: return "ring_suite";
  }
  return "?";
}

Gauge GaugeSection::make() const {
  return Gauge::geometric(kind, eps_max, eps_min, points);
}

namespace {

Experiment experiment_from_string(const std::string& s, const std::string& where) {
  for (auto e : {Experiment::embed_profiles, Experiment::pendulum,
                 Experiment::damped, Experiment::pu,
                 Experiment::variational_checks, Experiment::optctrl_lqr,
                 Experiment::ring_suite})
    if (s == to_string(e)) return e;
  throw ConfigError(where + ": experiment: unknown value '" + s + "'");
}

int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

// Reads one mapping, records lines and rejects keys it was not asked for.
class MapReader {
 public:
  MapReader(const YAML::Node& node, std::string prefix, std::string origin,
            std::map<std::string, int>* lines)
      : node_(node), prefix_(std::move(prefix)), origin_(std::move(origin)),
        lines_(lines) {
    if (!node_.IsMap())
      throw ConfigError(where(node_) + (prefix_.empty() ? "document" : prefix_) +
                        ": expected a mapping");
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      key_lines_[key] = line_of(it->first);
      if (lines_) lines_->emplace(path(key), line_of(it->first));
    }
  }

  bool has(const std::string& key) {
    allowed_.insert(key);
    return key_lines_.count(key) > 0;
  }

  YAML::Node child(const std::string& key) {
    allowed_.insert(key);
    return node_[key];
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    const YAML::Node n = node_[key];
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, int> ||
                    std::is_same_v<T, std::uint64_t>) {
        const long long v = n.as<long long>();
        if constexpr (!std::is_same_v<T, int>)
          if (v < 0) throw ConfigError(error(key, "must be non-negative"));
        out = static_cast<T>(v);
      } else {
        out = n.as<T>();
      }
    } catch (const YAML::Exception&) {
      throw ConfigError(error(key, "has the wrong type"));
    }
  }

  std::string error(const std::string& key, const std::string& msg) const {
    const auto it = key_lines_.find(key);
    const int line = it == key_lines_.end() ? line_of(node_) : it->second;
    return origin_ + ":" + std::to_string(line) + ": " + path(key) + ": " + msg;
  }

  std::string path(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, line] : key_lines_)
      if (!allowed_.count(key))
        throw ConfigError(origin_ + ":" + std::to_string(line) + ": " +
                          path(key) + ": unknown key");
  }

 private:
  std::string where(const YAML::Node& n) const {
    return origin_ + ":" + std::to_string(line_of(n)) + ": ";
  }

  YAML::Node node_;
  std::string prefix_, origin_;
  std::map<std::string, int>* lines_;
  std::map<std::string, int> key_lines_;
  std::set<std::string> allowed_;
};

YAML::Node parse_yaml(const std::string& text, const std::string& origin) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) +
                      ": malformed YAML: " + e.msg);
  }
}

void read_gauge(MapReader& top, GaugeSection& g, const std::string& origin,
                std::map<std::string, int>* lines) {
  MapReader r(top.child("gauge"), "gauge", origin, lines);
  if (r.has("kind")) {
    std::string k;
    r.get("kind", k);
    if (k == "power") g.kind = GaugeKind::power;
    else if (k == "exponential") g.kind = GaugeKind::exponential;
    else throw ConfigError(r.error("kind", "must be power or exponential"));
  }
  r.get("eps_max", g.eps_max);
  r.get("eps_min", g.eps_min);
  r.get("points", g.points);
  r.finish();
}

void read_mollifier(MapReader& top, MollifierSection& m,
                    const std::string& origin,
                    std::map<std::string, int>* lines) {
  MapReader r(top.child("mollifier"), "mollifier", origin, lines);
  r.get("moment_order", m.moment_order);
  r.get("scale_exponent", m.scale_exponent);
  r.finish();
}

std::string at(const ExperimentConfig& c, const std::string& key) {
  const auto it = c.lines.find(key);
  const std::string line = it == c.lines.end() ? "" : std::to_string(it->second) + ": ";
  return c.origin + ":" + line + key + ": ";
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& origin) {
  ExperimentConfig c;
  c.source = text;
  c.origin = origin;
  const YAML::Node root = parse_yaml(text, origin);
  MapReader top(root, "", origin, &c.lines);

  if (!top.has("experiment"))
    throw ConfigError(origin + ": experiment: required key missing");
  std::string exp;
  top.get("experiment", exp);
  c.experiment = experiment_from_string(exp, origin + ":" + std::to_string(c.lines["experiment"]));

  auto require = [&](const char* key) {
    if (!top.has(key))
      throw ConfigError(origin + ": " + key + ": section required by experiment " +
                        exp);
  };
  switch (c.experiment) {
    case Experiment::embed_profiles:
      require("gauge"), require("mollifier");
      break;
    case Experiment::pendulum:
    case Experiment::damped:
    case Experiment::pu:
      require("gauge"), require("mollifier"), require("ic"), require("t_span");
      break;
    case Experiment::variational_checks:
      require("gauge"), require("mollifier"), require("system"), require("ic"),
          require("t_span");
      break;
    case Experiment::optctrl_lqr:
      require("control");
      break;
    case Experiment::ring_suite:
      require("gauge");
      break;
  }

  if (top.has("gauge")) read_gauge(top, c.gauge, origin, &c.lines);
  if (top.has("mollifier")) read_mollifier(top, c.mollifier, origin, &c.lines);

  switch (c.experiment) {
    case Experiment::pendulum: c.system = SystemKind::pendulum; break;
    case Experiment::damped: c.system = SystemKind::damped_two_media; break;
    case Experiment::pu:
      c.system = SystemKind::pais_uhlenbeck;
      break;
    default: break;
  }
  if (top.has("system")) {
    std::string s;
    top.get("system", s);
    SystemKind k;
    try {
      k = system_kind_from_string(s);
    } catch (const Error&) {
      throw ConfigError(top.error("system", "unknown system '" + s + "'"));
    }
    const bool fixed = c.experiment == Experiment::pendulum ||
                       c.experiment == Experiment::damped ||
                       c.experiment == Experiment::pu;
    if (fixed && k != c.system)
      throw ConfigError(top.error("system", "does not match experiment " + exp));
    c.system = k;
  }

  if (top.has("params")) {
    MapReader r(top.child("params"), "params", origin, &c.lines);
    auto& p = c.params;
    r.get("L1", p.L1);
    r.get("L2", p.L2);
    r.get("g", p.g);
    r.get("theta0", p.theta0);
    r.get("beta1", p.beta1);
    r.get("beta2", p.beta2);
    r.get("Lambda", p.Lambda);
    r.get("m", p.m);
    r.get("ts", p.ts);
    r.get("w1", p.w1);
    r.get("w1hat", p.w1hat);
    r.get("w2", p.w2);
    r.get("w2hat", p.w2hat);
    r.finish();
  }

  if (top.has("ic")) {
    MapReader r(top.child("ic"), "ic", origin, &c.lines);
    const char* names[] = {"q0", "q1", "q2", "q3"};
    std::vector<double> v;
    for (const char* n : names) {
      if (!r.has(n)) break;
      double x = 0.0;
      r.get(n, x);
      v.push_back(x);
    }
    r.finish();
    c.ic = v;
  }

  if (top.has("t_span")) {
    const YAML::Node n = top.child("t_span");
    if (!n.IsSequence() || n.size() != 2)
      throw ConfigError(top.error("t_span", "expected [t1, t2]"));
    try {
      c.t1 = n[0].as<double>();
      c.t2 = n[1].as<double>();
    } catch (const YAML::Exception&) {
      throw ConfigError(top.error("t_span", "has the wrong type"));
    }
  }
  top.get("tol", c.tol);

  if (top.has("control")) {
    MapReader r(top.child("control"), "control", origin, &c.lines);
    auto& k = c.control;
    r.get("t1", k.t1);
    r.get("t2", k.t2);
    r.get("q1", k.q1);
    r.get("nodes", k.nodes);
    r.get("alpha", k.alpha);
    r.get("max_iter", k.max_iter);
    r.get("grad_tol", k.grad_tol);
    r.get("tol", k.tol);
    r.finish();
  }

  if (top.has("profile")) {
    MapReader r(top.child("profile"), "profile", origin, &c.lines);
    r.get("nodes", c.profile.nodes);
    r.get("span", c.profile.span);
    r.finish();
  }

  top.get("output_dir", c.output_dir);
  top.get("seed", c.seed);
  top.finish();
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  auto fail = [&](const std::string& key, const std::string& msg) {
    throw ConfigError(at(c, key) + msg);
  };
  const auto& g = c.gauge;
  if (g.points < 2) fail("gauge.points", "must be >= 2");
  if (!(g.eps_max > 0.0 && g.eps_max < 1.0)) fail("gauge.eps_max", "must lie in (0, 1)");
  if (!(g.eps_min > 0.0 && g.eps_min < g.eps_max))
    fail("gauge.eps_min", "must lie in (0, eps_max)");

  const auto& m = c.mollifier;
  if (m.moment_order < 2 || m.moment_order > 12 || m.moment_order % 2)
    fail("mollifier.moment_order", "must be even and in [2, 12]");
  if (!(m.scale_exponent > 0.0) || !std::isfinite(m.scale_exponent))
    fail("mollifier.scale_exponent", "must be positive");

  const auto& p = c.params;
  const std::pair<const char*, double> positive[] = {
      {"L1", p.L1}, {"L2", p.L2}, {"g", p.g}, {"theta0", p.theta0},
      {"Lambda", p.Lambda}, {"m", p.m}, {"w1", p.w1}, {"w1hat", p.w1hat},
      {"w2", p.w2}, {"w2hat", p.w2hat}};
  for (const auto& [name, v] : positive)
    if (!(v > 0.0) || !std::isfinite(v)) fail(std::string("params.") + name, "must be positive");
  if (!(p.beta1 >= 0.0) || !std::isfinite(p.beta1)) fail("params.beta1", "must be non-negative");
  if (!(p.beta2 >= 0.0) || !std::isfinite(p.beta2)) fail("params.beta2", "must be non-negative");
  if (!std::isfinite(p.ts)) fail("params.ts", "must be finite");

  const bool dynamic = c.experiment == Experiment::pendulum ||
                       c.experiment == Experiment::damped ||
                       c.experiment == Experiment::pu ||
                       c.experiment == Experiment::variational_checks;
  if (dynamic) {
    const std::size_t order = c.system == SystemKind::pais_uhlenbeck ? 4 : 2;
    if (c.ic.size() != order)
      fail("ic", "needs " + std::to_string(order) + " entries q0..q" +
                     std::to_string(order - 1));
    for (double v : c.ic)
      if (!std::isfinite(v)) fail("ic", "entries must be finite");
    if (!(c.t2 > c.t1) || !std::isfinite(c.t1) || !std::isfinite(c.t2))
      fail("t_span", "needs t1 < t2");
  }
  if (!(c.tol > 0.0 && c.tol <= 1e-3)) fail("tol", "must lie in (0, 1e-3]");

  const auto& k = c.control;
  if (!(k.t2 > k.t1)) fail("control.t2", "must exceed control.t1");
  if (!std::isfinite(k.q1)) fail("control.q1", "must be finite");
  if (k.nodes < 5) fail("control.nodes", "must be >= 5");
  if (!(k.alpha > 0.0)) fail("control.alpha", "must be positive");
  if (k.max_iter < 1) fail("control.max_iter", "must be >= 1");
  if (!(k.grad_tol > 0.0)) fail("control.grad_tol", "must be positive");
  if (!(k.tol > 0.0 && k.tol <= 1e-3)) fail("control.tol", "must lie in (0, 1e-3]");

  if (c.profile.nodes < 3) fail("profile.nodes", "must be >= 3");
  if (!(c.profile.span > 0.0)) fail("profile.span", "must be positive");
  if (c.output_dir.empty()) fail("output_dir", "must not be empty");
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_experiment_config(text, path);
}

AcceptanceConfig parse_acceptance_config(const std::string& text,
                                         const std::string& origin) {
  AcceptanceConfig c;
  c.source = text;
  const YAML::Node root = parse_yaml(text, origin);
  MapReader top(root, "", origin, nullptr);
  if (top.has("gauge")) read_gauge(top, c.gauge, origin, nullptr);
  // moment_order is range-checked by the suite itself so that a
  // misconfigured value shows up as a failing criterion.
  if (top.has("mollifier")) read_mollifier(top, c.mollifier, origin, nullptr);
  top.get("seed", c.seed);
  top.get("property_instances", c.property_instances);
  top.finish();
  if (c.gauge.points < 2)
    throw ConfigError(top.error("gauge", "gauge.points must be >= 2"));
  if (!(c.gauge.eps_min > 0.0 && c.gauge.eps_min < c.gauge.eps_max && c.gauge.eps_max < 1.0))
    throw ConfigError(top.error("gauge", "needs 0 < eps_min < eps_max < 1"));
  if (c.property_instances < 1)
    throw ConfigError(top.error("property_instances", "must be >= 1"));
  return c;
}

AcceptanceConfig load_acceptance_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_acceptance_config(text, path);
}

}  // namespace gsfcv::cli
