#pragma once

// Experiment runner: each experiment renders its CSV/JSON files in memory;
// write_artifacts puts them on disk next to a checksum manifest.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gsfcv_cli/config.hpp"

namespace gsfcv::cli {

struct ArtifactSet {
  std::vector<std::pair<std::string, std::string>> files;  // name, bytes

  void add(std::string name, std::string bytes) {
    files.emplace_back(std::move(name), std::move(bytes));
  }
  const std::string* find(const std::string& name) const;
};

ArtifactSet run_experiment(const ExperimentConfig& c);

// Writes every artifact plus manifest.json (config hash, library version,
// per-file SHA-256). Returns the written paths, manifest last.
std::vector<std::filesystem::path> write_artifacts(
    const ArtifactSet& a, const std::filesystem::path& dir,
    const std::string& config_text);

// delta.csv and heaviside.csv on the configured gauge.
ArtifactSet embed_profiles(const GaugeSection& g, const MollifierSection& m,
                           const ProfileSection& p);

}  // namespace gsfcv::cli
