#pragma once

#include <string>
#include <vector>

#include "ekms/cli/config.hpp"
#include "ekms/report.hpp"
#include "json.hpp"

namespace ekms::cli {

struct RunResult {
  int exit_code = 0;  // 0 all pass, 1 some check failed
  std::vector<CheckReport> checks;  // sorted by name
  nlohmann::json report;
  std::string summary;
  std::map<std::string, std::string> tables;  // file name -> CSV
};

/// Check names available to a subcommand (for `checks`, to the chosen backend).
std::vector<std::string> available_checks(Subcommand sub, const std::string& backend = "cft");

/// Every name reachable from some subcommand.
std::vector<std::string> all_check_names();

/// Runs the suite without touching the file system. ConfigError for bad selections.
RunResult execute(const RunConfig& cfg);

/// execute() plus report.json, summary.txt and tables/*.csv under cfg.out.
RunResult run(const RunConfig& cfg);

}  // namespace ekms::cli
