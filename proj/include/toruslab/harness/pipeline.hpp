#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "toruslab/harness/config.hpp"
#include "toruslab/harness/report.hpp"

namespace toruslab::harness {

inline const std::vector<std::string> kSubcommands{"metric-info", "geodesic", "minimal", "hedlund", "entropy",
                                                   "spanning",    "tube",     "full"};

struct RunResult {
    ojson report;   // subcommand, config, constants, tables, flags
    ojson timings;  // wall-clock seconds per stage, kept out of the report
    int exit_code = 0;
};

/// Runs one subcommand. Throws ConfigError for an unknown subcommand and
/// lets PreconditionError, RegionError and InstabilityError through.
RunResult run(const std::string& subcommand, const ExperimentConfig& config, int jobs = 1);

/// report.json, one CSV per table and timings.json.
void write_outputs(const RunResult& result, const std::filesystem::path& dir);

/// Exit status for an exception escaping run(): 2 for configuration and
/// region errors, 3 for numerical instability.
int exit_code_for(const std::exception& e);

}  // namespace toruslab::harness
