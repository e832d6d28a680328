#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "gsfcv_cli/acceptance.hpp"
#include "gsfcv_cli/config.hpp"
#include "gsfcv_cli/experiments.hpp"
#include "gsfcv_cli/io.hpp"

using namespace gsfcv::cli;
namespace fs = std::filesystem;

namespace {

std::string config_file(const std::string& name) {
  return read_file(fs::path(GSFCV_TEST_CONFIG_DIR) / name);
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("gsfcv_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-0.0), "0");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(1e300), "1e+300");
}

TEST(Csv, HeaderAndRows) {
  CsvTable t({"x", "eps", "value"});
  t.row({0.5, 0.25, 1.0});
  EXPECT_EQ(t.text(), "x,eps,value\n0.5,0.25,1\n");
}

TEST(Sha256, KnownDigest) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(ParallelMap, KeepsIndexOrder) {
  const auto v = parallel_map<int>(37, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
}

TEST(Config, ShippedConfigsParseAndValidate) {
  for (const auto& e : fs::directory_iterator(GSFCV_TEST_CONFIG_DIR)) {
    if (e.path().filename() == "acceptance.yaml") {
      EXPECT_NO_THROW(parse_acceptance_config(read_file(e.path()), e.path().string()));
      continue;
    }
    const auto c = parse_experiment_config(read_file(e.path()), e.path().string());
    EXPECT_NO_THROW(validate(c)) << e.path();
  }
}

TEST(Config, GaugePointsBelowTwoNamesTheField) {
  auto text = config_file("embed_profiles.yaml");
  const auto c = parse_experiment_config(text, "profiles.yaml");
  auto bad = c;
  bad.gauge.points = 1;
  try {
    validate(bad);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("gauge.points"), std::string::npos) << msg;
    EXPECT_NE(msg.find("profiles.yaml:"), std::string::npos) << msg;
  }
}

TEST(Config, UnknownKeyReportsLine) {
  auto text = config_file("pendulum.yaml");
  if (text.back() != '\n') text += '\n';
  const auto line = std::count(text.begin(), text.end(), '\n') + 1;
  text += "bogus: 3\n";
  try {
    parse_experiment_config(text, "x.yaml");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("x.yaml:" + std::to_string(line)), std::string::npos) << msg;
    EXPECT_NE(msg.find("bogus"), std::string::npos) << msg;
  }
}

TEST(Config, MalformedYamlIsConfigError) {
  EXPECT_THROW(parse_experiment_config("experiment: [unclosed\n", "y.yaml"), ConfigError);
  EXPECT_THROW(parse_experiment_config("experiment: teleport\n", "y.yaml"), ConfigError);
}

TEST(Experiments, EmbedProfiles) {
  GaugeSection g;
  g.points = 3;
  const auto a = embed_profiles(g, {}, {});
  const auto* delta = a.find("delta.csv");
  const auto* heav = a.find("heaviside.csv");
  ASSERT_NE(delta, nullptr);
  ASSERT_NE(heav, nullptr);
  EXPECT_EQ(first_line(*delta), "x,eps,value");
  // Every eps block has a sample at x = 0 with H = 1/2.
  int centers = 0;
  std::size_t pos = 0;
  while ((pos = heav->find("\n0,", pos)) != std::string::npos) {
    const auto end = heav->find('\n', pos + 1);
    const std::string row = heav->substr(pos + 1, end - pos - 1);
    EXPECT_NEAR(std::stod(row.substr(row.rfind(',') + 1)), 0.5, 1e-8) << row;
    ++centers;
    pos = end;
  }
  EXPECT_EQ(centers, 3);
}

TEST(Experiments, PaisUhlenbeckArtifacts) {
  auto c = parse_experiment_config(config_file("pu.yaml"), "pu.yaml");
  c.gauge.points = 2;
  c.gauge.eps_max = 2 * c.gauge.eps_min;
  validate(c);
  const auto a = run_experiment(c);
  ASSERT_NE(a.find("trajectory.csv"), nullptr);
  ASSERT_NE(a.find("energy.csv"), nullptr);
  ASSERT_NE(a.find("analytic_fit.json"), nullptr);
  EXPECT_EQ(first_line(*a.find("trajectory.csv")), "t,eps,q0,q1,q2,q3,rhs,energy");
  EXPECT_EQ(first_line(*a.find("energy.csv")), "t,eps,energy");
  const auto fit = nlohmann::json::parse(*a.find("analytic_fit.json"));
  EXPECT_NEAR(fit["initial"]["A1"].get<double>(), 6.02827, 1e-5);

  const auto dir = scratch("pu");
  const auto paths = write_artifacts(a, dir, c.source);
  ASSERT_EQ(paths.back().filename(), "manifest.json");
  const auto man = nlohmann::json::parse(read_file(paths.back()));
  EXPECT_EQ(man["config_sha256"], sha256_hex(c.source));
  EXPECT_EQ(man["files"].size(), a.files.size());
  for (const auto& f : man["files"])
    EXPECT_EQ(f["sha256"], sha256_hex(read_file(dir / f["name"].get<std::string>())));
}

TEST(Experiments, OptimalControlCsv) {
  const auto c = parse_experiment_config(config_file("optctrl_lqr.yaml"), "optctrl_lqr.yaml");
  const auto a = run_experiment(c);
  ASSERT_NE(a.find("optimal_control.csv"), nullptr);
  EXPECT_EQ(first_line(*a.find("optimal_control.csv")), "t,q,p,u,dHdu");
  const auto s = nlohmann::json::parse(*a.find("summary.json"));
  EXPECT_LE(s["grad_norm"].get<double>(), 1e-6);
  EXPECT_NEAR(s["cost"].get<double>(), s["closed_form_cost"].get<double>(), 1e-8);
}

TEST(Acceptance, MisconfiguredMomentOrderFailsWithMeasurement) {
  AcceptanceConfig c;
  c.mollifier.moment_order = 0;
  const auto r = check_mollifier(c);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.measured.empty());
  EXPECT_NE(summary_line(r).find("criterion 1 [FAIL]"), std::string::npos);
}

TEST(Acceptance, ReportHasTenCriteria) {
  AcceptanceConfig c;
  const auto dir = scratch("acceptance");
  const auto rep = run_acceptance(c, dir);
  ASSERT_EQ(rep.criteria.size(), 10u);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(rep.criteria[i].id, i + 1);
  const auto js = nlohmann::json::parse(read_file(dir / "acceptance_report.json"));
  EXPECT_EQ(js["criteria"].size(), 10u);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_TRUE(rep.criteria[9].pass);
}

TEST(Tool, InvalidGaugePointsExitsWithTwo) {
  const auto dir = scratch("tool");
  auto text = config_file("embed_profiles.yaml");
  const auto pos = text.find("points: ");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, text.find('\n', pos) - pos, "points: 1");
  write_file(dir / "bad.yaml", text);
  const std::string cmd = std::string("\"") + GSFCV_TOOL_PATH + "\" run \"" + (dir / "bad.yaml").string() +
                          "\" --output-dir \"" + (dir / "out").string() + "\" 2> \"" +
                          (dir / "err.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 2);
  EXPECT_NE(read_file(dir / "err.txt").find("gauge.points"), std::string::npos);
}
