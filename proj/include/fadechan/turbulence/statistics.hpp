// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fadechan/aperture/aperture.hpp"
#include "fadechan/turbulence/channel.hpp"
#include "fadechan/turbulence/realization.hpp"

namespace fadechan {

// A value with its standard error (integration or sampling).
struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

// Sampling plan for the first-principles statistics.
struct StatisticsPlan {
    std::size_t realizations = 512;
    std::uint64_t seed = 1;
    // Rescale every realization to the mean window power, removing the
    // total-power fluctuation of the straight-path phase model.
    bool conserve_power = true;
    RealizationGrid grid{};
    double quad_tol = 1e-12;
};

// Flags attached to a statistics run.
inline constexpr std::string_view kFlagWanderClamped = "sigma_bw2 clamped to 0";
inline constexpr std::string_view kFlagSpotVarianceClamped = "W variance clamped to 0";
inline constexpr std::string_view kFlagSpotCovarianceClamped = "W covariance clamped into the PSD range";

struct FieldStatistics {
    std::array<Estimate, 2> mean_eta;                 // <eta_1>, <eta_2>
    std::array<std::array<Estimate, 2>, 2> eta_corr;  // <eta_n eta_m>
    Estimate annular_variance;                        // Var(eta_1 - eta_2)
    Estimate W_ST;                                    // short-term spot radius
    Estimate sigma_bw2;                               // beam-wandering variance
    std::array<Estimate, 2> centroid_mean;            // <x>, <y>
    std::array<std::array<Estimate, 2>, 2> W2_corr;   // <W_i^2 W_j^2>
    Estimate theta_mean;                              // <Theta_1> = <Theta_2>
    Estimate theta_var;                               // Var Theta_i
    Estimate theta_cov;                               // Cov(Theta_1, Theta_2)

    // Diagnostics.
    std::array<Estimate, 2> sampled_mean_eta;  // realization averages
    Estimate sampled_power;                    // realization window power before rescaling
    double long_term_radius = 0.0;
    double window_radius = 0.0;
    std::size_t realizations = 0;
    std::vector<std::string> flags;

    bool has_flag(std::string_view flag) const;
};

// Means from the exact mean-intensity profile; all second-order quantities
// from phase realizations with jackknife errors. Throws DiagnosticError when
// <eta_n^2> exceeds <eta_n> by more than three standard errors.
FieldStatistics compute_field_statistics(const ChannelParams& params, const ApertureGeometry& geom,
                                         const StatisticsPlan& plan = {});

}  // namespace fadechan
