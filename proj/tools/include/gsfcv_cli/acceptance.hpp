#pragma once

// The ten-criterion acceptance suite. Each check returns its measured
// values next to the tolerances it was judged against; a check that throws
// is recorded as failed with the error text.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gsfcv_cli/config.hpp"
#include "gsfcv_cli/experiments.hpp"

namespace gsfcv::cli {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::vector<std::pair<std::string, double>> measured;
  std::vector<std::pair<std::string, double>> tolerance;
  std::string note;

  void measure(std::string key, double v) { measured.emplace_back(std::move(key), v); }
  void tol(std::string key, double v) { tolerance.emplace_back(std::move(key), v); }
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  bool all_pass() const;
  std::string to_json() const;
};

CriterionResult check_mollifier(const AcceptanceConfig& c);
CriterionResult check_embedding(const AcceptanceConfig& c, ArtifactSet& art);
CriterionResult check_calculus_properties(const AcceptanceConfig& c);
CriterionResult check_pendulum(const AcceptanceConfig& c, ArtifactSet& art);
CriterionResult check_small_oscillation(const AcceptanceConfig& c);
CriterionResult check_damped(const AcceptanceConfig& c, ArtifactSet& art);
CriterionResult check_pais_uhlenbeck(const AcceptanceConfig& c, ArtifactSet& art);
CriterionResult check_variational(const AcceptanceConfig& c, ArtifactSet& art);
CriterionResult check_optimal_control(const AcceptanceConfig& c, ArtifactSet& art);

// Criteria 1-9 with their CSV artifacts.
std::vector<CriterionResult> run_criteria(const AcceptanceConfig& c, ArtifactSet& art);

// Runs criteria 1-9 twice, adds the determinism criterion, writes the CSVs,
// acceptance_report.json and manifest.json into out_dir.
AcceptanceReport run_acceptance(const AcceptanceConfig& c,
                                const std::filesystem::path& out_dir);

// One "criterion N [PASS|FAIL] name: key=value ..." line.
std::string summary_line(const CriterionResult& r);

}  // namespace gsfcv::cli
