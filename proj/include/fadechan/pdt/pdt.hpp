// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fadechan/aperture/aperture.hpp"
#include "fadechan/numerics/samplers.hpp"
#include "fadechan/turbulence/channel.hpp"
#include "fadechan/turbulence/statistics.hpp"

namespace fadechan {

enum class PdtModel { beam_wandering, elliptic, weak_bw };

std::string_view model_name(PdtModel model);
// Throws InputError for an unknown name.
PdtModel parse_model(std::string_view name);

// Tracking and deterministic loss; the aiming offset lives in ApertureGeometry.
struct CorrectionSettings {
    double tracking_ratio = 1.0;  // Delta / sigma_bw, in (0, 1]
    double eta_det = 1.0;         // deterministic attenuation factor, in (0, 1]

    // Throws DomainError when either factor leaves (0, 1].
    void validate() const;
};

// Deterministic attenuation factor of a loss given in dB.
double db_to_factor(double loss_db);

struct SamplingPlan {
    std::size_t n_samples = 1'000'000;  // accepted samples
    std::size_t bins = 200;             // uniform bins on [0, 1]
    std::uint64_t seed = 1;
    // Samples per shard. Shard i draws from substream i of the seed, so the
    // result depends on (seed, shard_size) and never on the worker count.
    std::size_t shard_size = 1 << 16;

    void validate() const;
};

struct Provenance {
    std::string scenario_hash;
    std::uint64_t seed = 0;
};

inline constexpr std::string_view kFlagFewSamples = "fewer than 1000 samples";
inline constexpr std::string_view kFlagCovarianceClamped = "covariance clamped to PSD";
inline constexpr std::string_view kFlagTruncationDegraded = "truncated-lognormal approximation degraded";

struct PdtDiagnostics {
    std::size_t attempted = 0;            // draws including rejected ones
    std::size_t rejected_truncation = 0;  // outside (0, 1]^2
    std::size_t rejected_ordering = 0;    // eta_1 < eta_2
    ClampTally clamps;                    // approximations forced into [0, 1]
    std::vector<std::string> flags;

    double rejection_rate() const;
    bool has_flag(std::string_view flag) const;
};

struct TransmittanceDistribution {
    std::vector<double> bin_edges;  // size bins + 1
    std::vector<double> density;    // size bins
    std::size_t n_samples = 0;
    double mean = 0.0;
    double second_moment = 0.0;
    double variance = 0.0;
    double mean_error = 0.0;      // standard error of the sample mean
    double variance_error = 0.0;  // standard error of the sample variance
    PdtModel model_tag = PdtModel::beam_wandering;
    Provenance provenance;
    PdtDiagnostics diagnostics;

    std::size_t bins() const { return density.size(); }
    double bin_width(std::size_t i) const { return bin_edges[i + 1] - bin_edges[i]; }
    // Sum of density * width.
    double total_mass() const;
    // Probability of eta > threshold, linear inside the straddling bin.
    double mass_above(double threshold) const;
    // Inverse of the binned distribution function, p in [0, 1].
    double quantile(double p) const;
};

// Beam-wandering model: circular spot of radius W whose centroid is Rice
// distributed about the aiming offset with per-axis deviation
// tracking_ratio * sigma_bw.
TransmittanceDistribution pdt_beam_wandering(double W, double sigma_bw, const ApertureGeometry& geom,
                                             const CorrectionSettings& corrections, const SamplingPlan& plan);

// Elliptic-beam model: (x0, y0, theta1, theta2) Gaussian, orientation from
// the angle sampler.
TransmittanceDistribution pdt_elliptic(const FieldStatistics& stats, const ChannelParams& params,
                                       const ApertureGeometry& geom, const CorrectionSettings& corrections,
                                       const SamplingPlan& plan, const AngleMode& angle = AngleMode::uniform());

// Parameters of the conditional log-normal model under weak beam wandering.
// Offsets are scaled by the length a_n R_n throughout.
struct WeakBWParams {
    std::array<double, 2> eta0{};                         // eta_n^(0)
    std::array<std::array<double, 2>, 2> zeta0{};         // zeta_nm^(0)
    std::array<double, 2> mu_offset{};                    // -ln[(eta_n^(0))^2 / zeta_nn^(0)]
    std::array<std::array<double, 2>, 2> cov_lognormal{}; // ln[zeta_nm^2 / (eta_n^(0) eta_m^(0))]
    std::array<double, 2> R{};                            // Weibull scale at width W_ST
    std::array<double, 2> lambda{};                       // Weibull shape at width W_ST
    std::array<double, 2> radius{};                       // a_n
    double delta = 0.0;                                   // centroid deviation after tracking
    double truncation_mass = 1.0;                         // F at r0 = d0
    std::vector<std::string> flags;

    // exp(-((r0 / a_n) / R_n)^lambda_n)
    double offset_factor(int n, double r0) const;
    // Mean of ln eta_n given deflection r0: -mu_offset_n - ((r0/a_n)/R_n)^lambda_n.
    double log_mean(int n, double r0) const;
    double conditional_mean(int n, double r0) const;
    double conditional_corr(int n, int m, double r0) const;
    bool has_flag(std::string_view flag) const;
};

WeakBWParams weak_bw_params(const FieldStatistics& stats, const ApertureGeometry& geom,
                            const CorrectionSettings& corrections, double quad_tol = 1e-12);

// Averages of the conditional moments over the Rayleigh deflection density
// of deviation delta, by quadrature in r0. Reproduces the input moments.
struct RoundTripMoments {
    std::array<double, 2> mean{};
    std::array<std::array<double, 2>, 2> corr{};
};
RoundTripMoments weak_bw_round_trip(const WeakBWParams& wparams, double quad_tol = 1e-12);

// Throws DiagnosticError when more than half of the draws are rejected.
TransmittanceDistribution pdt_weak_bw(const WeakBWParams& wparams, const FieldStatistics& stats,
                                      const ApertureGeometry& geom, const CorrectionSettings& corrections,
                                      const SamplingPlan& plan);

// Support scaled by eta_det, density by 1 / eta_det.
TransmittanceDistribution apply_deterministic_loss(const TransmittanceDistribution& dist, double eta_det);

// Everything one model run needs.
struct PdtInputs {
    PdtModel model = PdtModel::weak_bw;
    FieldStatistics stats;
    ChannelParams params;
    ApertureGeometry geom;
    CorrectionSettings corrections;
    SamplingPlan plan;
    AngleMode angle;
};

TransmittanceDistribution run_model(const PdtInputs& inputs);

struct OffsetResult {
    double d0 = 0.0;
    double mean_eta = 0.0;
    TransmittanceDistribution distribution;
};

// Runs the model once per offset with the shared seed. Offsets must lie in
// [0, 2 a1].
std::vector<OffsetResult> scan_offset(const PdtInputs& inputs, std::span<const double> d0_grid);

}  // namespace fadechan
