// Runs the acceptance suite on the shipped configuration and prints one line
// per criterion. Exit status is nonzero when any criterion fails.

#include <filesystem>
#include <iostream>
#include <string>

#include "gsfcv_cli/acceptance.hpp"
#include "gsfcv_cli/config.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path out = argc > 1 ? argv[1] : "acceptance_out";
  try {
    const auto c = gsfcv::cli::load_acceptance_config(
        (std::filesystem::path(GSFCV_TEST_CONFIG_DIR) / "acceptance.yaml").string());
    const auto rep = gsfcv::cli::run_acceptance(c, out);
    int failed = 0;
    for (const auto& r : rep.criteria) {
      std::cout << gsfcv::cli::summary_line(r) << "\n";
      failed += r.pass ? 0 : 1;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
              << "\n";
    return failed == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance run aborted: " << e.what() << "\n";
    return 2;
  }
}
