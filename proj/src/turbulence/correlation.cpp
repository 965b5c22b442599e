// SPDX-License-Identifier: Apache-2.0
#include "fadechan/turbulence/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "fadechan/error.hpp"
#include "fadechan/numerics/qmc.hpp"
#include "fadechan/numerics/quadrature.hpp"

namespace fadechan {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFiveThirds = 5.0 / 3.0;

double norm2(Vec2 v) { return std::hypot(v[0], v[1]); }

// Integral over [0, 1] of |a + b t|^(5/3).
double path_integral_fast(Vec2 a, Vec2 b) {
    static const QuadratureRule rule = gauss_legendre(20, 0.0, 1.0);
    const double bb = b[0] * b[0] + b[1] * b[1];
    auto panel = [&](double lo, double hi) {
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double t = lo + (hi - lo) * rule.nodes[i];
            s += rule.weights[i] * std::pow(norm2({a[0] + b[0] * t, a[1] + b[1] * t}), kFiveThirds);
        }
        return s * (hi - lo);
    };
    if (bb == 0.0) return std::pow(norm2(a), kFiveThirds);
    const double t_star = -(a[0] * b[0] + a[1] * b[1]) / bb;
    if (t_star > 0.0 && t_star < 1.0) return panel(0.0, t_star) + panel(t_star, 1.0);
    return panel(0.0, 1.0);
}

// Standard normal CDF; maps a Gaussian QMC coordinate back to (0, 1).
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

CorrelationEstimate to_estimate(const ComplexQuadResult& r) {
    CorrelationEstimate e;
    e.value = r.value.real();
    e.error = r.error_real;
    e.imag = r.value.imag();
    e.imag_error = r.error_imag;
    e.evaluations = r.evaluations;
    return e;
}

// Common pieces of the fourth-order integrand: Gaussian widths and the
// structure-function exponent for receiver points r1, r2 and source
// separations q1, q2, q3.
struct FourthOrderKernel {
    const ChannelParams& params;
    double c;
    double gc;  // gamma * c
    double coef;

    explicit FourthOrderKernel(const ChannelParams& p)
        : params(p), c(p.receiver_scale()), gc(p.curvature() * p.receiver_scale()), coef(p.structure_coefficient()) {}

    std::complex<double> operator()(Vec2 r1, Vec2 r2, Vec2 q1, Vec2 q2, Vec2 q3) const {
        const Vec2 dr{r1[0] - r2[0], r1[1] - r2[1]};
        const double phase = -c * (dr[0] * q2[0] + dr[1] * q2[1] + (r1[0] + r2[0]) * q3[0] + (r1[1] + r2[1]) * q3[1]) +
                             gc * (q1[0] * q2[0] + q1[1] * q2[1]);
        double exponent = 0.0;
        if (coef > 0.0) {
            for (double sgn : {-1.0, 1.0}) {
                const Vec2 a{q1[0] + sgn * q2[0], q1[1] + sgn * q2[1]};
                const Vec2 b{q1[0] + sgn * q3[0], q1[1] + sgn * q3[1]};
                const Vec2 d{q2[0] + sgn * q3[0], q2[1] + sgn * q3[1]};
                exponent += path_integral_fast(a, {dr[0] - a[0], dr[1] - a[1]}) -
                            path_integral_fast(b, {dr[0] - b[0], dr[1] - b[1]}) -
                            0.375 * std::pow(norm2(d), kFiveThirds);
            }
            exponent *= 0.5 * coef;
        }
        return std::polar(std::exp(exponent), phase);
    }

    // Prefactor 2 k^4 / (pi^2 (2 pi)^3 L^4 W0^2).
    double prefactor() const {
        const double W0 = params.W0;
        return 2.0 * std::pow(c, 4) / (kPi * kPi * std::pow(2.0 * kPi, 3) * W0 * W0);
    }

    std::vector<double> widths() const {
        const double g = params.curvature() * params.omega();
        const double s = params.W0 / std::numbers::sqrt2;
        const double s3 = s / std::sqrt(1.0 + g * g);
        return {s, s, s, s, s3, s3};
    }
};

double second_order_width(const ChannelParams& p) {
    const double g = p.curvature() * p.omega();
    return p.W0 / std::sqrt(1.0 + g * g);
}

Vec2 disk_point(double a, double z_radial, double z_angle) {
    const double r = a * std::sqrt(normal_cdf(z_radial));
    const double th = 2.0 * kPi * normal_cdf(z_angle);
    return {r * std::cos(th), r * std::sin(th)};
}

}  // namespace

bool CorrelationEstimate::imprecise() const { return error > 0.05 * std::abs(value); }

double phase_structure(Vec2 r, Vec2 r_prime, const ChannelParams& params) {
    const double coef = params.structure_coefficient();
    if (coef == 0.0) return 0.0;
    auto f = [&](double xi) {
        return std::pow(norm2({r[0] * xi + r_prime[0] * (1.0 - xi), r[1] * xi + r_prime[1] * (1.0 - xi)}),
                        kFiveThirds);
    };
    // Split at the point of closest approach to the origin, where the
    // integrand has a cusp.
    const Vec2 b{r[0] - r_prime[0], r[1] - r_prime[1]};
    const double bb = b[0] * b[0] + b[1] * b[1];
    double total = 0.0;
    const double t_star = bb > 0.0 ? -(r_prime[0] * b[0] + r_prime[1] * b[1]) / bb : -1.0;
    if (t_star > 0.0 && t_star < 1.0) {
        total = adaptive_quad_1d(f, 0.0, t_star, 1e-12).value + adaptive_quad_1d(f, t_star, 1.0, 1e-12).value;
    } else {
        total = adaptive_quad_1d(f, 0.0, 1.0, 1e-12).value;
    }
    return coef * total;
}

double phase_structure_fast(Vec2 r, Vec2 r_prime, const ChannelParams& params) {
    const double coef = params.structure_coefficient();
    if (coef == 0.0) return 0.0;
    return coef * path_integral_fast(r_prime, {r[0] - r_prime[0], r[1] - r_prime[1]});
}

CorrelationEstimate gamma2(Vec2 r, const ChannelParams& params, std::size_t n_samples, RngStream& rng) {
    params.validate();
    const double c = params.receiver_scale();
    const double half_d = 0.1875 * params.structure_coefficient();
    const double s = second_order_width(params);
    const std::vector<double> sigma{s, s};
    auto f = [&](std::span<const double> q) {
        const double phase = -c * (r[0] * q[0] + r[1] * q[1]);
        return std::polar(std::exp(-half_d * std::pow(std::hypot(q[0], q[1]), kFiveThirds)), phase);
    };
    auto res = gauss_weighted_qmc(2, sigma, f, n_samples, rng);
    const double scale = c * c / (4.0 * kPi * kPi);
    res.value *= scale;
    res.error_real *= scale;
    res.error_imag *= scale;
    return to_estimate(res);
}

CorrelationEstimate gamma4(Vec2 r1, Vec2 r2, const ChannelParams& params, std::size_t n_samples, RngStream& rng) {
    params.validate();
    const FourthOrderKernel kernel(params);
    const auto sigma = kernel.widths();
    auto f = [&](std::span<const double> q) {
        return kernel(r1, r2, {q[0], q[1]}, {q[2], q[3]}, {q[4], q[5]});
    };
    auto res = gauss_weighted_qmc(6, sigma, f, n_samples, rng);
    const double scale = kernel.prefactor();
    res.value *= scale;
    res.error_real *= scale;
    res.error_imag *= scale;
    return to_estimate(res);
}

CorrelationEstimate mean_eta_sampled(double a, const ChannelParams& params, std::size_t n_samples, RngStream& rng,
                                     std::size_t replicates) {
    params.validate();
    if (!(a > 0.0)) throw DomainError("disk radius must be positive");
    const double c = params.receiver_scale();
    const double half_d = 0.1875 * params.structure_coefficient();
    const double s = second_order_width(params);
    const std::vector<double> sigma{1.0, 1.0, s, s};
    auto f = [&](std::span<const double> x) {
        const Vec2 r = disk_point(a, x[0], x[1]);
        const double phase = -c * (r[0] * x[2] + r[1] * x[3]);
        return std::polar(std::exp(-half_d * std::pow(std::hypot(x[2], x[3]), kFiveThirds)), phase);
    };
    auto res = gauss_weighted_qmc(4, sigma, f, n_samples, rng, replicates);
    // Disk area, c^2/(4 pi^2), and 1/(2 pi) undoing the Gaussian weight of
    // the two uniform coordinates.
    const double scale = kPi * a * a * c * c / (4.0 * kPi * kPi) / (2.0 * kPi);
    res.value *= scale;
    res.error_real *= scale;
    res.error_imag *= scale;
    return to_estimate(res);
}

CorrelationEstimate eta_corr_sampled(double a_n, double a_m, const ChannelParams& params, std::size_t n_samples,
                                     RngStream& rng, std::size_t replicates) {
    params.validate();
    if (!(a_n > 0.0) || !(a_m > 0.0)) throw DomainError("disk radii must be positive");
    const FourthOrderKernel kernel(params);
    const auto w = kernel.widths();
    const std::vector<double> sigma{1.0, 1.0, 1.0, 1.0, w[0], w[1], w[2], w[3], w[4], w[5]};
    auto f = [&](std::span<const double> x) {
        const Vec2 r1 = disk_point(a_n, x[0], x[1]);
        const Vec2 r2 = disk_point(a_m, x[2], x[3]);
        return kernel(r1, r2, {x[4], x[5]}, {x[6], x[7]}, {x[8], x[9]});
    };
    auto res = gauss_weighted_qmc(10, sigma, f, n_samples, rng, replicates);
    const double scale = kernel.prefactor() * kPi * a_n * a_n * kPi * a_m * a_m / (4.0 * kPi * kPi);
    res.value *= scale;
    res.error_real *= scale;
    res.error_imag *= scale;
    return to_estimate(res);
}

MeanIntensityProfile::MeanIntensityProfile(ChannelParams params, double tol) : params_(params), tol_(tol) {
    params_.validate();
    const double g = params_.curvature() * params_.omega();
    c_ = params_.receiver_scale();
    gauss_ = (1.0 + g * g) / (2.0 * params_.W0 * params_.W0);
    turb_ = 0.1875 * params_.structure_coefficient();
    // Beyond rho_max the coherence factor is below e^-46.
    rho_max_ = std::sqrt(46.0 / gauss_);
}

double MeanIntensityProfile::coherence(double rho) const {
    return std::exp(-gauss_ * rho * rho - turb_ * std::pow(rho, kFiveThirds));
}

double MeanIntensityProfile::integrate(double (*kernel)(double, double, double), double arg) const {
    // Each Bessel oscillation gets its own panels so the adaptive rule never
    // has to discover them.
    const double period = arg > 0.0 ? 2.0 * kPi / (c_ * arg) : rho_max_;
    const int panels = std::clamp(static_cast<int>(std::ceil(rho_max_ / period)), 1, 4000);
    double total = 0.0, err = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double lo = rho_max_ * i / panels, hi = rho_max_ * (i + 1) / panels;
        const auto r = adaptive_quad_1d([&](double rho) { return coherence(rho) * kernel(rho, c_, arg); }, lo, hi,
                                        tol_ / panels);
        total += r.value;
        err += r.error_estimate;
    }
    error_ = std::max(error_, err);
    return total;
}

double MeanIntensityProfile::intensity(double r) const {
    if (!(r >= 0.0)) throw DomainError("radius must be non-negative");
    auto kernel = [](double rho, double c, double rr) { return std::cyl_bessel_j(0.0, c * rr * rho) * rho; };
    return c_ * c_ / (2.0 * kPi) * integrate(kernel, r);
}

double MeanIntensityProfile::power_in_disk(double a) const {
    if (!(a >= 0.0)) throw DomainError("radius must be non-negative");
    if (a == 0.0) return 0.0;
    auto kernel = [](double rho, double c, double aa) { return c * aa * std::cyl_bessel_j(1.0, c * aa * rho); };
    return std::min(1.0, integrate(kernel, a));
}

double MeanIntensityProfile::second_moment(double R) const {
    if (!(R >= 0.0)) throw DomainError("radius must be non-negative");
    if (R == 0.0) return 0.0;
    // Inner integral of r^3 J0(c rho r) over [0, R] is R^4 h(c rho R) with
    // h(z) = J1(z)/z - 2 J2(z)/z^2 (series near 0).
    auto kernel = [](double rho, double c, double RR) {
        const double z = c * rho * RR;
        double h;
        if (z < 0.05) {
            const double z2 = z * z;
            h = 0.25 - z2 / 24.0 + z2 * z2 / 512.0;
        } else {
            h = std::cyl_bessel_j(1.0, z) / z - 2.0 * std::cyl_bessel_j(2.0, z) / (z * z);
        }
        return rho * h;
    };
    return 0.5 * c_ * c_ * std::pow(R, 4) * integrate(kernel, R);
}

double MeanIntensityProfile::long_term_radius() const {
    const double target = -std::expm1(-2.0);
    double lo = 0.0, hi = std::sqrt(params_.vacuum_radius2());
    while (power_in_disk(hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw DiagnosticError("mean intensity does not concentrate");
    }
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (power_in_disk(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace fadechan
