#pragma once

// Executes a configured study and writes its reports:
//
//   <out>/<study>.csv             main ladders and one summary row per report
//   <out>/<study>_companions.csv  companion ladders, when the study has any
//   <out>/<study>_timing.csv      wall-clock times per level
//   <out>/summary.json            checks, fits and metrics; PASS/FAIL
//
// Everything except the timing file is a function of the config and seed
// alone.

#include <iosfwd>
#include <string>
#include <vector>

#include "tfw/config.hpp"
#include "tfw/experiments.hpp"

namespace tfw {

/// Runs the study named in the config. `threads` = 0 uses every core.
std::vector<experiments::ErrorReport> run_study(const RunConfig& cfg, int threads);

std::string summary_json(const RunConfig& cfg, const std::vector<experiments::ErrorReport>& reports);

/// Runs the study and writes the files above. Returns 0 when every check
/// passes and 2 otherwise; errors propagate as exceptions.
int run(const RunConfig& cfg, const std::string& out_dir, int threads, std::ostream& log);

}  // namespace tfw
