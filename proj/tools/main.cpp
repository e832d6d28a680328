#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <gsfcv/error.hpp>
#include <gsfcv/version.hpp>

#include "gsfcv_cli/acceptance.hpp"
#include "gsfcv_cli/config.hpp"
#include "gsfcv_cli/experiments.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kNumerical = 1;
constexpr int kConfig = 2;

struct Overrides {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> eps_points;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--output-dir", o.output_dir, "Directory for the generated files");
  cmd->add_option("--seed", o.seed, "Seed for every random probe");
  cmd->add_option("--eps-points", o.eps_points, "Number of eps grid points");
}

int run(const std::string& path, const Overrides& o) {
  auto c = gsfcv::cli::load_experiment_config(path);
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.seed) c.seed = *o.seed;
  if (o.eps_points) {
    c.gauge.points = *o.eps_points;
    c.lines.erase("gauge.points");
  }
  gsfcv::cli::validate(c);
  const auto art = gsfcv::cli::run_experiment(c);
  for (const auto& p : gsfcv::cli::write_artifacts(art, c.output_dir, c.source))
    std::cout << p.string() << "\n";
  return kOk;
}

int acceptance(const std::string& config_dir, const Overrides& o) {
  auto c = gsfcv::cli::load_acceptance_config(
      (std::filesystem::path(config_dir) / "acceptance.yaml").string());
  if (o.seed) c.seed = *o.seed;
  if (o.eps_points) {
    if (*o.eps_points < 2) throw gsfcv::cli::ConfigError("--eps-points must be >= 2");
    c.gauge.points = *o.eps_points;
  }
  const std::filesystem::path out = o.output_dir.value_or("acceptance");
  const auto rep = gsfcv::cli::run_acceptance(c, out);
  for (const auto& r : rep.criteria) std::cout << gsfcv::cli::summary_line(r) << "\n";
  std::cout << "report: " << (out / "acceptance_report.json").string() << "\n";
  return rep.all_pass() ? kOk : kNumerical;
}

int dump_profiles(const Overrides& o) {
  gsfcv::cli::GaugeSection g;
  if (o.eps_points) {
    if (*o.eps_points < 2) throw gsfcv::cli::ConfigError("--eps-points must be >= 2");
    g.points = *o.eps_points;
  }
  const auto art = gsfcv::cli::embed_profiles(g, {}, {});
  for (const auto& p : gsfcv::cli::write_artifacts(art, o.output_dir.value_or("profiles"),
                                                   "dump-profiles"))
    std::cout << p.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized smooth function experiments"};
  app.set_version_flag("--version", std::string(gsfcv::kVersion));
  app.require_subcommand(1);

  Overrides o;
  std::string config_path;
  // The source tree's configs when present, the installed copy otherwise.
  std::string config_dir = std::filesystem::exists(GSFCV_SOURCE_CONFIG_DIR)
                               ? GSFCV_SOURCE_CONFIG_DIR
                               : GSFCV_INSTALLED_CONFIG_DIR;

  auto* run_cmd = app.add_subcommand("run", "Run one experiment from a YAML config");
  run_cmd->add_option("config", config_path, "Experiment config")->required();
  add_overrides(run_cmd, o);

  auto* acc_cmd = app.add_subcommand("acceptance", "Run the acceptance suite");
  acc_cmd->add_option("--config-dir", config_dir, "Directory holding acceptance.yaml");
  add_overrides(acc_cmd, o);

  auto* dump_cmd = app.add_subcommand("dump-profiles", "Write delta and Heaviside profiles");
  add_overrides(dump_cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run_cmd) return run(config_path, o);
    if (*acc_cmd) return acceptance(config_dir, o);
    if (*dump_cmd) return dump_profiles(o);
  } catch (const gsfcv::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const gsfcv::Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
