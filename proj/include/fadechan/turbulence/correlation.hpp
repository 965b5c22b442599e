// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "fadechan/numerics/rng.hpp"
#include "fadechan/turbulence/channel.hpp"

namespace fadechan {

// Phase structure function for receiver separation r and source separation
// r_prime, integrated along the path by adaptive quadrature.
double phase_structure(Vec2 r, Vec2 r_prime, const ChannelParams& params);

// Same quantity from a fixed Gauss-Legendre rule split at the point of
// closest approach; accurate to ~1e-7 relative and cheap enough for use
// inside sampled integrands.
double phase_structure_fast(Vec2 r, Vec2 r_prime, const ChannelParams& params);

// Randomized-QMC estimate of a real quantity defined by a complex integral.
struct CorrelationEstimate {
    double value = 0.0;       // real part
    double error = 0.0;       // standard error of the real part
    double imag = 0.0;        // residual imaginary part (zero in exact arithmetic)
    double imag_error = 0.0;
    std::size_t evaluations = 0;
    // Relative error above 5 %.
    bool imprecise() const;
};

// Mean intensity at receiver point r (2-D sampled integral).
CorrelationEstimate gamma2(Vec2 r, const ChannelParams& params, std::size_t n_samples, RngStream& rng);

// Intensity correlation at receiver points r1, r2 (6-D sampled integral).
CorrelationEstimate gamma4(Vec2 r1, Vec2 r2, const ChannelParams& params, std::size_t n_samples, RngStream& rng);

// Mean power through a centred disk, sampling the disk and the source
// separation jointly (4-D).
CorrelationEstimate mean_eta_sampled(double a, const ChannelParams& params, std::size_t n_samples, RngStream& rng,
                                     std::size_t replicates = 16);

// Power correlation of two centred disks, sampling both disks and the three
// source separations jointly (10-D).
CorrelationEstimate eta_corr_sampled(double a_n, double a_m, const ChannelParams& params, std::size_t n_samples,
                                     RngStream& rng, std::size_t replicates = 16);

// Rotationally symmetric mean intensity reduced to one-dimensional Hankel
// integrals over the source separation. Deterministic and error-controlled.
class MeanIntensityProfile {
public:
    explicit MeanIntensityProfile(ChannelParams params, double tol = 1e-12);

    double intensity(double r) const;
    // Mean power inside the centred disk of radius a.
    double power_in_disk(double a) const;
    // Integral of x^2 times the mean intensity over the disk of radius R.
    double second_moment(double R) const;
    // Radius enclosing a fraction 1 - e^-2 of the mean power.
    double long_term_radius() const;
    // Largest quadrature error estimate seen so far.
    double error_bound() const { return error_; }

private:
    double coherence(double rho) const;
    double integrate(double (*kernel)(double, double, double), double arg) const;

    ChannelParams params_;
    double tol_;
    double c_;
    double gauss_;      // (1 + gamma^2 Omega^2) / (2 W0^2)
    double turb_;       // half of D(0, rho) / rho^(5/3)
    double rho_max_;
    mutable double error_ = 0.0;
};

}  // namespace fadechan
