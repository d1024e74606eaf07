#pragma once

#include <string>

#include "refract/config.hpp"

namespace refract {

/// Fixed 17-significant-digit float formatting for bit-stable CSV diffs.
std::string format_g17(double v);

struct RunOutcome {
  bool pass = true;
  std::string summary;
};

/// Executes the configured command, writing summary.txt, the
/// command-specific CSVs and config_echo.json into out_dir. Returns the
/// pass/fail outcome used for the process exit status.
RunOutcome run(const RunConfig& cfg, const std::string& out_dir);

}  // namespace refract
