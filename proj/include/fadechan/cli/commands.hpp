// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fadechan/cli/output.hpp"
#include "fadechan/cli/scenario.hpp"
#include "fadechan/pdt/pdt.hpp"
#include "fadechan/turbulence/statistics.hpp"

namespace fadechan {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitDiagnostic = 2, kExitBudget = 3 };

Json statistics_json(const ChannelParams& params, const FieldStatistics& stats);
Json distribution_json(const TransmittanceDistribution& dist);
Json weak_bw_json(const WeakBWParams& wparams);

// Each command writes its canonical outputs into out_dir (created if
// missing) plus a non-canonical run_info.json, and returns an exit code.
// Diagnostic and budget failures are reported in summary.json.
int command_stats(const Scenario& scenario, const std::filesystem::path& out_dir);
int command_pdt(const Scenario& scenario, const std::filesystem::path& out_dir);
int command_sweep(const Scenario& scenario, const std::filesystem::path& out_dir);

struct ValidationCheck {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

// Default bounds by check name.
const std::map<std::string, double>& default_tolerances();

// Runs the desk-scale oracle suite for the scenario's channel and aperture.
// Throws InputError for an override naming an unknown check.
std::vector<ValidationCheck> validation_checks(const Scenario& scenario,
                                               const std::map<std::string, double>& overrides);
int command_validate(const Scenario& scenario, const std::filesystem::path& out_dir,
                     const std::map<std::string, double>& overrides);

// Full command line: fadechan stats|pdt|sweep|validate <scenario.json>
// [--set k=v]... [--out DIR] [--seed N] [--tolerances FILE].
int run_cli(int argc, const char* const* argv);

}  // namespace fadechan
