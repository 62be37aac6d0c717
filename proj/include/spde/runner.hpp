#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace spde {

struct RunOptions {
  int workers = 1;
  std::string out_dir;  // overrides the config's output_dir when nonempty
  std::optional<std::uint64_t> seed_override;
};

struct RunOutcome {
  int exit_code = 0;  // 0 pass, 1 test failure, 2 config error, 3 runtime
  bool pass = false;
  std::string name;
  std::string experiment;
  std::string error;  // populated for exit codes 2 and 3
  std::vector<std::string> artifacts;
  nlohmann::json report;
};

// Runs one experiment and writes <name>-report.json, <name>-manifest.json
// and any CSV trajectories into the output directory. All statistical
// reductions happen in fixed path order, so the artifacts are byte-identical
// across repeat runs and worker counts; the manifest's timing_ms field is
// the one wall-clock exception.
RunOutcome run_config_document(nlohmann::json doc, const RunOptions& opt);
RunOutcome run_config_file(const std::string& path, const RunOptions& opt);

// Runs every *.json config in the directory in filename order, writes
// suite-rollup.json, and returns the worst exit code. Duplicate config
// names and an empty directory are suite-level configuration errors.
int run_suite(const std::string& dir, const RunOptions& opt);

}  // namespace spde
