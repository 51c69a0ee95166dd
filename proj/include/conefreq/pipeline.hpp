#pragma once

#include <string>
#include <utility>
#include <vector>

#include "conefreq/config.hpp"

namespace conefreq {

struct CheckResult {
  std::string name;
  bool passed = true;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct PipelineResult {
  int status = 0;  // 0 when every enabled check passed, 1 otherwise
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, std::string>> summary;  // in emission order
  std::vector<std::string> files;                            // written, relative to the output dir

  std::vector<std::string> failures() const;
};

// Runs config.stage ("all" runs every stage in order) and writes the report
// bundle into config.out_dir. Module errors other than the soft ones
// recorded as failed checks (unreliable gamma, monotonicity, empty doubling
// range, blow-up multiplicity) propagate as conefreq::Error.
PipelineResult run_pipeline(const RunConfig& config);

}  // namespace conefreq
