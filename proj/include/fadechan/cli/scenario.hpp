// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fadechan/aperture/aperture.hpp"
#include "fadechan/cli/output.hpp"
#include "fadechan/numerics/samplers.hpp"
#include "fadechan/pdt/pdt.hpp"
#include "fadechan/turbulence/channel.hpp"

namespace fadechan {

enum class SweepVariable { d0, tracking_ratio, L };

struct SweepSettings {
    SweepVariable variable = SweepVariable::d0;
    std::vector<double> grid;
};

struct ScenarioSampling {
    std::size_t n_samples = 1'000'000;
    std::size_t bins = 200;
    std::uint64_t seed = 1;
    std::size_t shard_size = 1 << 16;
    std::size_t realizations = 512;  // phase realizations behind the statistics
    double quad_tol = 1e-12;
};

struct Scenario {
    PdtModel model = PdtModel::weak_bw;
    ChannelParams channel;
    ApertureGeometry aperture{0.075, 0.023, 0.0};
    double tracking_ratio = 1.0;
    double loss_db = 0.0;
    double eta_det = 1.0;  // from loss_db
    AngleMode orientation;
    ScenarioSampling sampling;
    std::optional<SweepSettings> sweep;
    std::map<std::string, double> tolerances;  // validate bound overrides
    std::vector<std::string> warnings;         // model applicability
    Json resolved;                             // every field after defaults

    CorrectionSettings corrections() const { return {tracking_ratio, eta_det}; }
    SamplingPlan pdt_plan() const;
    StatisticsPlan statistics_plan() const;
    // Digest of the resolved scenario without the seed.
    std::string hash() const;
};

std::string_view sweep_variable_name(SweepVariable v);

// Applies `path=value` to the document; the value is read as JSON when it
// parses, otherwise as a string. Throws InputError on a malformed override.
void apply_override(Json& doc, const std::string& assignment);

// Validates, fills defaults and attaches applicability warnings. Throws
// InputError naming the offending field.
Scenario scenario_from_json(const Json& doc);

Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace fadechan
