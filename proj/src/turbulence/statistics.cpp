// SPDX-License-Identifier: Apache-2.0
#include "fadechan/turbulence/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fadechan/error.hpp"
#include "fadechan/numerics/parallel.hpp"
#include "fadechan/turbulence/correlation.hpp"

namespace fadechan {
namespace {

// Per-realization raw moments entering the averages.
enum Raw : std::size_t {
    kE1, kE2, kXc, kYc, kSxx, kSyy,
    kE1E1, kE2E2, kE1E2, kXcXc, kYcYc, kSxxSxx, kSyySyy, kSxxSyy,
    kPower,
    kRawCount
};
using RawVector = std::array<double, kRawCount>;

enum Derived : std::size_t {
    kCov11, kCov22, kCov12, kAnnularVar,
    kWander, kWanderRaw,
    kSpot2, kSpot,
    kW11, kW12, kSpotVarRaw, kSpotCovRaw,
    kThetaMean, kThetaVar, kThetaCov,
    kMeanX, kMeanY, kMeanE1, kMeanE2, kMeanPower,
    kDerivedCount
};
using DerivedVector = std::array<double, kDerivedCount>;

RawVector raw_moments(const RealizationMoments& m, double scale) {
    const double e1 = scale * m.eta1, e2 = scale * m.eta2;
    const double xc = scale * m.xc, yc = scale * m.yc;
    const double sxx = scale * m.sxx, syy = scale * m.syy;
    return {e1, e2, xc, yc, sxx, syy, e1 * e1, e2 * e2, e1 * e2, xc * xc, yc * yc, sxx * sxx, syy * syy, sxx * syy,
            m.power};
}

// Clamp tolerance for quantities that vanish analytically (vacuum).
constexpr double kRoundoff = 1e-12;

DerivedVector derive(const RawVector& m, double W0) {
    DerivedVector d{};
    d[kCov11] = m[kE1E1] - m[kE1] * m[kE1];
    d[kCov22] = m[kE2E2] - m[kE2] * m[kE2];
    d[kCov12] = m[kE1E2] - m[kE1] * m[kE2];
    d[kAnnularVar] = d[kCov11] + d[kCov22] - 2.0 * d[kCov12];
    d[kWanderRaw] = 0.5 * ((m[kXcXc] - m[kXc] * m[kXc]) + (m[kYcYc] - m[kYc] * m[kYc]));
    const double s2 = std::max(d[kWanderRaw], 0.0);
    d[kWander] = s2;
    // Spot radius: 4 (int x^2 <I> - int int x1 x2 Gamma4), symmetrized in x, y.
    const double spot2 = 2.0 * ((m[kSxx] + m[kSyy]) - (m[kXcXc] + m[kYcYc]));
    d[kSpot2] = spot2;
    d[kSpot] = std::sqrt(std::max(spot2, 0.0));
    const double qxx = 0.5 * (m[kSxxSxx] + m[kSyySyy]);
    const double qxy = m[kSxxSyy];
    d[kW11] = 8.0 * (-8.0 * s2 * s2 - s2 * spot2 + 3.0 * qxx - qxy);
    d[kW12] = 8.0 * (-s2 * spot2 - qxx + 3.0 * qxy);
    const double w4 = spot2 * spot2;
    d[kSpotVarRaw] = d[kW11] - w4;
    d[kSpotCovRaw] = d[kW12] - w4;
    // Relative spot-size (co)variances; the covariance is kept inside the
    // range where the log-variable block stays positive semidefinite.
    const double rv = w4 > 0.0 ? std::max(d[kSpotVarRaw] / w4, 0.0) : 0.0;
    const double rc = w4 > 0.0 ? std::clamp(d[kSpotCovRaw] / w4, -rv / (1.0 + rv), rv) : 0.0;
    d[kThetaMean] = std::log(spot2 / (W0 * W0)) - 0.5 * std::log1p(rv);
    d[kThetaVar] = std::log1p(rv);
    d[kThetaCov] = std::log1p(rc);
    d[kMeanX] = m[kXc];
    d[kMeanY] = m[kYc];
    d[kMeanE1] = m[kE1];
    d[kMeanE2] = m[kE2];
    d[kMeanPower] = m[kPower];
    return d;
}

RawVector average(const RawVector& sum, double count) {
    RawVector out{};
    for (std::size_t k = 0; k < kRawCount; ++k) out[k] = sum[k] / count;
    return out;
}

}  // namespace

bool FieldStatistics::has_flag(std::string_view flag) const {
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

FieldStatistics compute_field_statistics(const ChannelParams& params, const ApertureGeometry& geom,
                                         const StatisticsPlan& plan) {
    params.validate();
    geom.validate();
    if (plan.realizations < 2) throw DomainError("statistics need at least two realizations");

    FieldStatistics out;
    const MeanIntensityProfile profile(params, plan.quad_tol);
    out.long_term_radius = profile.long_term_radius();
    out.window_radius =
        std::max(plan.grid.window_factor * out.long_term_radius, geom.a1 + out.long_term_radius);
    const double mean1 = profile.power_in_disk(geom.a1);
    const double mean2 = profile.power_in_disk(geom.a2);
    const double window_power = profile.power_in_disk(out.window_radius);
    const double mean_err = profile.error_bound();
    out.mean_eta = {Estimate{mean1, mean_err}, Estimate{mean2, mean_err}};

    const RealizationEngine engine(params, geom.a1, geom.a2, out.window_radius, plan.grid);
    // Without turbulence every realization is the same deterministic field.
    const bool deterministic = params.Cn2 == 0.0;
    const std::size_t n = deterministic ? 1 : plan.realizations;
    std::vector<RealizationMoments> samples(n);
    parallel_for(n, [&](std::size_t i) { samples[i] = engine.sample(plan.seed, i); });
    out.realizations = n;

    std::vector<RawVector> raw(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double scale =
            plan.conserve_power && samples[i].power > 0.0 ? window_power / samples[i].power : 1.0;
        raw[i] = raw_moments(samples[i], scale);
    }

    // Jackknife over contiguous blocks.
    const std::size_t blocks = std::min<std::size_t>(64, n);
    std::vector<RawVector> block_sum(blocks, RawVector{});
    std::vector<double> block_count(blocks, 0.0);
    RawVector total{};
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t lo = b * n / blocks, hi = (b + 1) * n / blocks;
        for (std::size_t i = lo; i < hi; ++i)
            for (std::size_t k = 0; k < kRawCount; ++k) block_sum[b][k] += raw[i][k];
        block_count[b] = static_cast<double>(hi - lo);
        for (std::size_t k = 0; k < kRawCount; ++k) total[k] += block_sum[b][k];
    }
    const DerivedVector value = derive(average(total, static_cast<double>(n)), params.W0);
    DerivedVector error{};
    if (blocks >= 2) {
        std::vector<DerivedVector> loo(blocks);
        DerivedVector centre{};
        for (std::size_t b = 0; b < blocks; ++b) {
            RawVector rest{};
            for (std::size_t k = 0; k < kRawCount; ++k) rest[k] = total[k] - block_sum[b][k];
            loo[b] = derive(average(rest, static_cast<double>(n) - block_count[b]), params.W0);
            for (std::size_t k = 0; k < kDerivedCount; ++k) centre[k] += loo[b][k] / static_cast<double>(blocks);
        }
        for (std::size_t k = 0; k < kDerivedCount; ++k) {
            double ss = 0.0;
            for (std::size_t b = 0; b < blocks; ++b) ss += (loo[b][k] - centre[k]) * (loo[b][k] - centre[k]);
            error[k] = std::sqrt(ss * static_cast<double>(blocks - 1) / static_cast<double>(blocks));
        }
    }
    auto est = [&](std::size_t k) { return Estimate{value[k], error[k]}; };

    const std::array<double, 2> means{mean1, mean2};
    const std::array<std::size_t, 3> cov_index{kCov11, kCov12, kCov22};
    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t b = 0; b < 2; ++b) {
            const std::size_t k = cov_index[a + b];
            const double prod_err = mean_err * (means[a] + means[b]);
            out.eta_corr[a][b] = {means[a] * means[b] + value[k], std::hypot(error[k], prod_err)};
        }
    }
    out.annular_variance = est(kAnnularVar);
    out.sigma_bw2 = est(kWander);
    out.W_ST = est(kSpot);
    out.centroid_mean = {est(kMeanX), est(kMeanY)};
    out.W2_corr = {{{est(kW11), est(kW12)}, {est(kW12), est(kW11)}}};
    out.theta_mean = est(kThetaMean);
    out.theta_var = est(kThetaVar);
    out.theta_cov = est(kThetaCov);
    out.sampled_mean_eta = {est(kMeanE1), est(kMeanE2)};
    out.sampled_power = est(kMeanPower);

    const double w4 = value[kSpot2] * value[kSpot2];
    if (value[kWanderRaw] < -kRoundoff * value[kSpot2]) out.flags.emplace_back(kFlagWanderClamped);
    if (value[kSpotVarRaw] < -kRoundoff * w4) out.flags.emplace_back(kFlagSpotVarianceClamped);
    const double rv = std::max(value[kSpotVarRaw], 0.0) / w4;
    const double rc = value[kSpotCovRaw] / w4;
    if (rc > rv * (1.0 + kRoundoff) + kRoundoff || rc < -rv / (1.0 + rv) - kRoundoff)
        out.flags.emplace_back(kFlagSpotCovarianceClamped);

    for (std::size_t a = 0; a < 2; ++a) {
        const Estimate& sq = out.eta_corr[a][a];
        if (sq.value > means[a] + 3.0 * std::hypot(sq.error, mean_err) + kRoundoff) {
            std::ostringstream msg;
            msg.precision(6);
            msg << "inconsistent moments for aperture " << (a + 1) << ": <eta^2> = " << sq.value
                << " exceeds <eta> = " << means[a] << " beyond error bars (" << sq.error << ")";
            throw DiagnosticError(msg.str());
        }
    }
    return out;
}

}  // namespace fadechan
