// SPDX-License-Identifier: Apache-2.0
#include "fadechan/pdt/pdt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include <Eigen/Dense>

#include "fadechan/error.hpp"
#include "fadechan/numerics/parallel.hpp"
#include "fadechan/numerics/quadrature.hpp"
#include "fadechan/numerics/rng.hpp"

namespace fadechan {
namespace {

constexpr std::size_t kFewSamples = 1000;
constexpr double kMaxRejection = 0.5;

struct ShardTally {
    std::vector<std::uint64_t> counts;
    double sum = 0.0;
    double sum2 = 0.0;
    double sum3 = 0.0;
    double sum4 = 0.0;
    std::size_t accepted = 0;
    std::size_t attempted = 0;
    std::size_t rejected_truncation = 0;
    std::size_t rejected_ordering = 0;
    ClampTally clamps;
};

// Runs draw(rng, tally) -> optional<eta> shard by shard until every shard
// has its quota of accepted samples, then merges in shard order.
template <class Draw>
TransmittanceDistribution sample_distribution(PdtModel model, const SamplingPlan& plan, Draw&& draw) {
    plan.validate();
    const std::size_t shards = (plan.n_samples + plan.shard_size - 1) / plan.shard_size;
    const RngStream root(plan.seed, 0);
    std::vector<ShardTally> tallies(shards);
    parallel_for(shards, [&](std::size_t s) {
        ShardTally& t = tallies[s];
        t.counts.assign(plan.bins, 0);
        const std::size_t quota = std::min(plan.shard_size, plan.n_samples - s * plan.shard_size);
        // Past this many draws the rejection rate is already above the limit.
        const std::size_t cap = static_cast<std::size_t>(quota / (1.0 - kMaxRejection)) + 64;
        RngStream rng = root.substream(s);
        while (t.accepted < quota) {
            if (t.attempted >= cap) {
                std::ostringstream msg;
                msg << model_name(model) << ": rejection rate above " << kMaxRejection << " (" << t.attempted
                    << " draws for " << t.accepted << " accepted samples)";
                throw DiagnosticError(msg.str());
            }
            ++t.attempted;
            const std::optional<double> eta = draw(rng, t);
            if (!eta) continue;
            const double v = std::clamp(*eta, 0.0, 1.0);
            const auto bin = std::min<std::size_t>(plan.bins - 1, static_cast<std::size_t>(v * plan.bins));
            ++t.counts[bin];
            t.sum += v;
            t.sum2 += v * v;
            t.sum3 += v * v * v;
            t.sum4 += v * v * v * v;
            ++t.accepted;
        }
    });

    TransmittanceDistribution dist;
    dist.model_tag = model;
    dist.provenance.seed = plan.seed;
    std::vector<std::uint64_t> counts(plan.bins, 0);
    double sum = 0.0, sum2 = 0.0, sum3 = 0.0, sum4 = 0.0;
    auto& diag = dist.diagnostics;
    for (const auto& t : tallies) {
        for (std::size_t b = 0; b < plan.bins; ++b) counts[b] += t.counts[b];
        sum += t.sum;
        sum2 += t.sum2;
        sum3 += t.sum3;
        sum4 += t.sum4;
        diag.attempted += t.attempted;
        diag.rejected_truncation += t.rejected_truncation;
        diag.rejected_ordering += t.rejected_ordering;
        diag.clamps.merge(t.clamps);
    }
    const double n = static_cast<double>(plan.n_samples);
    dist.n_samples = plan.n_samples;
    dist.bin_edges.resize(plan.bins + 1);
    for (std::size_t b = 0; b <= plan.bins; ++b) dist.bin_edges[b] = static_cast<double>(b) / plan.bins;
    dist.density.resize(plan.bins);
    for (std::size_t b = 0; b < plan.bins; ++b)
        dist.density[b] = static_cast<double>(counts[b]) / (n * dist.bin_width(b));
    dist.mean = sum / n;
    dist.second_moment = sum2 / n;
    dist.variance = std::max(dist.second_moment - dist.mean * dist.mean, 0.0);
    dist.mean_error = plan.n_samples > 1 ? std::sqrt(dist.variance / (n - 1.0)) : 0.0;
    const double m = dist.mean;
    const double central4 = sum4 / n - 4.0 * m * sum3 / n + 6.0 * m * m * dist.second_moment - 3.0 * m * m * m * m;
    const double spread = central4 - dist.variance * dist.variance;
    dist.variance_error = plan.n_samples > 1 ? std::sqrt(std::max(spread, 0.0) / (n - 1.0)) : 0.0;
    if (plan.n_samples < kFewSamples) diag.flags.emplace_back(kFlagFewSamples);
    if (diag.rejection_rate() > kMaxRejection) {
        std::ostringstream msg;
        msg << model_name(model) << ": rejection rate " << diag.rejection_rate() << " above " << kMaxRejection;
        throw DiagnosticError(msg.str());
    }
    return dist;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// P(X1 <= 0, X2 <= 0) for a bivariate normal.
double orthant_probability(const std::array<double, 2>& mean, const std::array<std::array<double, 2>, 2>& cov,
                           double tol) {
    const double s1 = std::sqrt(cov[0][0]), s2 = std::sqrt(cov[1][1]);
    if (s1 == 0.0 || s2 == 0.0) {
        const double p1 = s1 == 0.0 ? (mean[0] <= 0.0 ? 1.0 : 0.0) : normal_cdf(-mean[0] / s1);
        const double p2 = s2 == 0.0 ? (mean[1] <= 0.0 ? 1.0 : 0.0) : normal_cdf(-mean[1] / s2);
        return p1 * p2;
    }
    const double b1 = -mean[0] / s1, b2 = -mean[1] / s2;
    const double rho = std::clamp(cov[0][1] / (s1 * s2), -1.0, 1.0);
    const double slack = 1.0 - rho * rho;
    if (slack < 1e-14) {
        if (rho > 0.0) return normal_cdf(std::min(b1, b2));
        return std::max(0.0, normal_cdf(b1) + normal_cdf(b2) - 1.0);
    }
    // Beyond 8 deviations the normal density is below double resolution.
    constexpr double kEdge = 8.0;
    if (b1 <= -kEdge) return 0.0;
    const double root = std::sqrt(slack);
    const auto f = [&](double z) {
        return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi) * normal_cdf((b2 - rho * z) / root);
    };
    return adaptive_quad_1d(f, -kEdge, std::min(b1, kEdge), tol).value;
}

// Rayleigh average int_0^inf xi e^{-xi^2/2} exp(-sum_k (delta xi / scale_k)^lambda_k) d xi.
double rayleigh_average(double delta, std::span<const double> scale, std::span<const double> lambda, double tol) {
    if (delta == 0.0) return 1.0;
    const auto f = [&](double xi) {
        double e = -0.5 * xi * xi;
        for (std::size_t k = 0; k < scale.size(); ++k) e -= std::pow(delta * xi / scale[k], lambda[k]);
        return xi * std::exp(e);
    };
    return adaptive_quad_1d(f, 0.0, std::numeric_limits<double>::infinity(), tol).value;
}

bool contains(const std::vector<std::string>& flags, std::string_view flag) {
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

void require_stats(const FieldStatistics& stats) {
    if (!(stats.W_ST.value > 0.0) || !std::isfinite(stats.W_ST.value))
        throw DomainError("field statistics: W_ST must be positive");
    if (!(stats.sigma_bw2.value >= 0.0)) throw DomainError("field statistics: sigma_bw2 must be non-negative");
}

}  // namespace

std::string_view model_name(PdtModel model) {
    switch (model) {
        case PdtModel::beam_wandering: return "beam_wandering";
        case PdtModel::elliptic: return "elliptic";
        case PdtModel::weak_bw: return "weak_bw";
    }
    return "unknown";
}

PdtModel parse_model(std::string_view name) {
    for (PdtModel m : {PdtModel::beam_wandering, PdtModel::elliptic, PdtModel::weak_bw})
        if (model_name(m) == name) return m;
    throw InputError("model", "unknown model '" + std::string(name) + "' (beam_wandering, elliptic, weak_bw)");
}

void CorrectionSettings::validate() const {
    if (!(tracking_ratio > 0.0 && tracking_ratio <= 1.0)) throw DomainError("tracking_ratio must lie in (0, 1]");
    if (!(eta_det > 0.0 && eta_det <= 1.0)) throw DomainError("eta_det must lie in (0, 1]");
}

double db_to_factor(double loss_db) {
    if (!(loss_db >= 0.0) || !std::isfinite(loss_db)) throw DomainError("loss in dB must be non-negative");
    return std::pow(10.0, -loss_db / 10.0);
}

void SamplingPlan::validate() const {
    if (n_samples == 0) throw DomainError("n_samples must be positive");
    if (bins == 0) throw DomainError("bins must be positive");
    if (shard_size == 0) throw DomainError("shard_size must be positive");
}

double PdtDiagnostics::rejection_rate() const {
    if (attempted == 0) return 0.0;
    return static_cast<double>(rejected_truncation + rejected_ordering) / static_cast<double>(attempted);
}

bool PdtDiagnostics::has_flag(std::string_view flag) const { return contains(flags, flag); }

double TransmittanceDistribution::total_mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < bins(); ++i) m += density[i] * bin_width(i);
    return m;
}

double TransmittanceDistribution::mass_above(double threshold) const {
    double m = 0.0;
    for (std::size_t i = 0; i < bins(); ++i) {
        const double lo = bin_edges[i], hi = bin_edges[i + 1];
        if (threshold <= lo) m += density[i] * (hi - lo);
        else if (threshold < hi) m += density[i] * (hi - threshold);
    }
    return m;
}

double TransmittanceDistribution::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile: p must lie in [0, 1]");
    double cum = 0.0;
    for (std::size_t i = 0; i < bins(); ++i) {
        const double mass = density[i] * bin_width(i);
        if (mass > 0.0 && cum + mass >= p) return bin_edges[i] + (p - cum) / mass * bin_width(i);
        cum += mass;
    }
    return bin_edges.back();
}

TransmittanceDistribution pdt_beam_wandering(double W, double sigma_bw, const ApertureGeometry& geom,
                                             const CorrectionSettings& corrections, const SamplingPlan& plan) {
    geom.validate();
    corrections.validate();
    if (!(W > 0.0)) throw DomainError("beam wandering: spot radius must be positive");
    if (!(sigma_bw >= 0.0)) throw DomainError("beam wandering: sigma_bw must be non-negative");
    const double delta = corrections.tracking_ratio * sigma_bw;
    return sample_distribution(PdtModel::beam_wandering, plan,
                               [&](RngStream& rng, ShardTally& t) -> std::optional<double> {
                                   const double r0 = sample_rice(geom.d0, delta, rng);
                                   return annular_transmittance_approx(r0, W, geom, &t.clamps) *
                                          corrections.eta_det;
                               });
}

TransmittanceDistribution pdt_elliptic(const FieldStatistics& stats, const ChannelParams& params,
                                       const ApertureGeometry& geom, const CorrectionSettings& corrections,
                                       const SamplingPlan& plan, const AngleMode& angle) {
    params.validate();
    geom.validate();
    corrections.validate();
    require_stats(stats);
    if (!std::isfinite(stats.theta_mean.value) || !(stats.theta_var.value >= 0.0))
        throw DomainError("elliptic model: log-variable parameters missing");
    const double delta2 = corrections.tracking_ratio * corrections.tracking_ratio * stats.sigma_bw2.value;
    Eigen::Vector4d mean(geom.d0, 0.0, stats.theta_mean.value, stats.theta_mean.value);
    Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
    cov(0, 0) = cov(1, 1) = delta2;
    cov(2, 2) = cov(3, 3) = stats.theta_var.value;
    cov(2, 3) = cov(3, 2) = stats.theta_cov.value;
    const GaussianVectorSampler sampler(mean, cov);
    const Eigen::Matrix4d factor = sampler.factor();
    const double W0 = params.W0;

    auto dist = sample_distribution(PdtModel::elliptic, plan, [&](RngStream& rng, ShardTally& t) -> std::optional<double> {
        Eigen::Vector4d z;
        for (int i = 0; i < 4; ++i) z[i] = rng.normal();
        const Eigen::Vector4d v = mean + factor * z;
        const EllipticBeamState state{v[0], v[1], v[2], v[3], sample_wrapped_angle(angle, rng)};
        return elliptic_transmittance(state, geom, W0, &t.clamps) * corrections.eta_det;
    });
    if (sampler.clamped()) dist.diagnostics.flags.emplace_back(kFlagCovarianceClamped);
    return dist;
}

double WeakBWParams::offset_factor(int n, double r0) const {
    const auto i = static_cast<std::size_t>(n - 1);
    if (radius[i] <= 0.0 || r0 <= 0.0) return 1.0;
    return std::exp(-std::pow(r0 / (radius[i] * R[i]), lambda[i]));
}

double WeakBWParams::log_mean(int n, double r0) const {
    const auto i = static_cast<std::size_t>(n - 1);
    const double shift = r0 > 0.0 ? std::pow(r0 / (radius[i] * R[i]), lambda[i]) : 0.0;
    return -mu_offset[i] - shift;
}

double WeakBWParams::conditional_mean(int n, double r0) const {
    return eta0[static_cast<std::size_t>(n - 1)] * offset_factor(n, r0);
}

double WeakBWParams::conditional_corr(int n, int m, double r0) const {
    const double z = zeta0[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(m - 1)];
    return z * z * offset_factor(n, r0) * offset_factor(m, r0);
}

bool WeakBWParams::has_flag(std::string_view flag) const { return contains(flags, flag); }

WeakBWParams weak_bw_params(const FieldStatistics& stats, const ApertureGeometry& geom,
                            const CorrectionSettings& corrections, double quad_tol) {
    geom.validate();
    corrections.validate();
    require_stats(stats);
    if (!(geom.a2 > 0.0)) throw DomainError("weak_bw model needs a central obscuration (a2 > 0)");
    WeakBWParams w;
    w.delta = corrections.tracking_ratio * std::sqrt(stats.sigma_bw2.value);
    const double xi = 2.0 / stats.W_ST.value;
    std::array<double, 2> scale{};
    for (std::size_t n = 0; n < 2; ++n) {
        w.radius[n] = geom.radius(static_cast<int>(n + 1));
        const auto p = weibull_params(w.radius[n], xi);
        w.R[n] = p.R;
        w.lambda[n] = p.lambda;
        scale[n] = w.radius[n] * p.R;
    }
    for (std::size_t n = 0; n < 2; ++n) {
        const double mean = stats.mean_eta[n].value;
        if (!(mean > 0.0)) throw DiagnosticError("weak_bw: mean transmittance must be positive");
        w.eta0[n] = mean / rayleigh_average(w.delta, std::span(&scale[n], 1), std::span(&w.lambda[n], 1), quad_tol);
        for (std::size_t m = n; m < 2; ++m) {
            const std::array<double, 2> s{scale[n], scale[m]};
            const std::array<double, 2> l{w.lambda[n], w.lambda[m]};
            const double corr = stats.eta_corr[n][m].value;
            if (!(corr > 0.0)) throw DiagnosticError("weak_bw: transmittance correlation must be positive");
            w.zeta0[n][m] = std::sqrt(corr / rayleigh_average(w.delta, s, l, quad_tol));
            w.zeta0[m][n] = w.zeta0[n][m];
        }
    }
    for (std::size_t n = 0; n < 2; ++n) {
        w.mu_offset[n] = -std::log(w.eta0[n] * w.eta0[n] / w.zeta0[n][n]);
        for (std::size_t m = 0; m < 2; ++m)
            w.cov_lognormal[n][m] = std::log(w.zeta0[n][m] * w.zeta0[n][m] / (w.eta0[n] * w.eta0[m]));
    }
    if (w.eta0[0] > 1.0 || w.eta0[1] > 1.0) w.flags.emplace_back("eta0 exceeds 1");

    Eigen::Matrix2d cov;
    cov << w.cov_lognormal[0][0], w.cov_lognormal[0][1], w.cov_lognormal[1][0], w.cov_lognormal[1][1];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    if (eig.eigenvalues().minCoeff() < 0.0) {
        const Eigen::Vector2d clamped = eig.eigenvalues().cwiseMax(0.0);
        const Eigen::Matrix2d fixed = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
        for (int n = 0; n < 2; ++n)
            for (int m = 0; m < 2; ++m) w.cov_lognormal[n][m] = fixed(n, m);
        w.cov_lognormal[1][0] = w.cov_lognormal[0][1];
        w.flags.emplace_back(kFlagCovarianceClamped);
    }

    const std::array<double, 2> at_offset{w.log_mean(1, geom.d0), w.log_mean(2, geom.d0)};
    w.truncation_mass = orthant_probability(at_offset, w.cov_lognormal, 1e-10);
    if (w.truncation_mass < 0.95) w.flags.emplace_back(kFlagTruncationDegraded);
    return w;
}

RoundTripMoments weak_bw_round_trip(const WeakBWParams& w, double quad_tol) {
    RoundTripMoments out;
    const double d2 = w.delta * w.delta;
    // Rayleigh density in r0 with the given integrand, r0 in [0, inf).
    const auto average = [&](const std::function<double(double)>& g) {
        if (w.delta == 0.0) return g(0.0);
        const auto f = [&](double r) { return r / d2 * std::exp(-0.5 * r * r / d2) * g(r); };
        return adaptive_quad_1d(f, 0.0, std::numeric_limits<double>::infinity(), quad_tol).value;
    };
    for (int n = 1; n <= 2; ++n) {
        out.mean[n - 1] = average([&](double r) { return w.conditional_mean(n, r); });
        for (int m = 1; m <= 2; ++m)
            out.corr[n - 1][m - 1] = average([&](double r) { return w.conditional_corr(n, m, r); });
    }
    return out;
}

TransmittanceDistribution pdt_weak_bw(const WeakBWParams& w, const FieldStatistics& stats,
                                      const ApertureGeometry& geom, const CorrectionSettings& corrections,
                                      const SamplingPlan& plan) {
    geom.validate();
    corrections.validate();
    require_stats(stats);
    Eigen::Matrix2d cov;
    cov << w.cov_lognormal[0][0], w.cov_lognormal[0][1], w.cov_lognormal[1][0], w.cov_lognormal[1][1];
    const GaussianVectorSampler sampler(Eigen::Vector2d::Zero(), cov);
    const Eigen::Matrix2d factor = sampler.factor();

    auto dist = sample_distribution(PdtModel::weak_bw, plan, [&](RngStream& rng, ShardTally& t) -> std::optional<double> {
        const double r0 = sample_rice(geom.d0, w.delta, rng);
        const Eigen::Vector2d z(rng.normal(), rng.normal());
        const Eigen::Vector2d g = factor * z;
        const double l1 = w.log_mean(1, r0) + g[0];
        const double l2 = w.log_mean(2, r0) + g[1];
        if (l1 > 0.0 || l2 > 0.0) {
            ++t.rejected_truncation;
            return std::nullopt;
        }
        const double eta1 = std::exp(l1), eta2 = std::exp(l2);
        if (eta1 < eta2) {
            ++t.rejected_ordering;
            return std::nullopt;
        }
        return (eta1 - eta2) * corrections.eta_det;
    });
    for (const auto& f : w.flags) dist.diagnostics.flags.push_back(f);
    if (!dist.diagnostics.has_flag(kFlagTruncationDegraded) &&
        static_cast<double>(dist.diagnostics.rejected_truncation) / dist.diagnostics.attempted > 0.05)
        dist.diagnostics.flags.emplace_back(kFlagTruncationDegraded);
    if (sampler.clamped() && !dist.diagnostics.has_flag(kFlagCovarianceClamped))
        dist.diagnostics.flags.emplace_back(kFlagCovarianceClamped);
    return dist;
}

TransmittanceDistribution apply_deterministic_loss(const TransmittanceDistribution& dist, double eta_det) {
    if (!(eta_det > 0.0 && eta_det <= 1.0)) throw DomainError("eta_det must lie in (0, 1]");
    TransmittanceDistribution out = dist;
    for (auto& e : out.bin_edges) e *= eta_det;
    for (auto& d : out.density) d /= eta_det;
    out.mean *= eta_det;
    out.second_moment *= eta_det * eta_det;
    out.variance *= eta_det * eta_det;
    out.mean_error *= eta_det;
    out.variance_error *= eta_det * eta_det;
    return out;
}

TransmittanceDistribution run_model(const PdtInputs& in) {
    switch (in.model) {
        case PdtModel::beam_wandering:
            require_stats(in.stats);
            return pdt_beam_wandering(in.stats.W_ST.value, std::sqrt(in.stats.sigma_bw2.value), in.geom,
                                      in.corrections, in.plan);
        case PdtModel::elliptic:
            return pdt_elliptic(in.stats, in.params, in.geom, in.corrections, in.plan, in.angle);
        case PdtModel::weak_bw: {
            const auto w = weak_bw_params(in.stats, in.geom, in.corrections);
            return pdt_weak_bw(w, in.stats, in.geom, in.corrections, in.plan);
        }
    }
    throw DomainError("unknown model");
}

std::vector<OffsetResult> scan_offset(const PdtInputs& inputs, std::span<const double> d0_grid) {
    inputs.geom.validate();
    for (double d : d0_grid)
        if (!(d >= 0.0 && d <= 2.0 * inputs.geom.a1)) throw DomainError("scan_offset: offsets must lie in [0, 2 a1]");
    std::vector<OffsetResult> out;
    out.reserve(d0_grid.size());
    for (double d : d0_grid) {
        PdtInputs in = inputs;
        in.geom.d0 = d;
        auto dist = run_model(in);
        out.push_back({d, dist.mean, std::move(dist)});
    }
    return out;
}

}  // namespace fadechan
