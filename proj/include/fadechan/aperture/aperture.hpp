// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

namespace fadechan {

// Concentric annular receiver: outer radius a1, central obscuration a2,
// and the aiming offset d0 of the beam axis from the aperture centre.
struct ApertureGeometry {
    double a1 = 0.0;
    double a2 = 0.0;
    double d0 = 0.0;

    // Throws DomainError unless a1 > a2 >= 0 and d0 >= 0.
    void validate() const;
    double radius(int n) const { return n == 1 ? a1 : a2; }
};

// Weibull-type shape of the transmittance of a disk of radius a for a
// Gaussian spot with inverse-width argument xi (xi = 2/W for a circular beam).
//   factor(r0/a) = exp(-((r0/a)/R)^lambda) = exp(-rate * (r0/a)^lambda),
//   rate = R^(-lambda).
// As a*xi -> 0, lambda -> 2 and rate -> (a xi)^2 / 2, so R diverges like
// sqrt(2)/(a xi) while the factor keeps its Gaussian small-aperture limit.
struct WeibullParams {
    double eta0 = 0.0;
    double R = 0.0;
    double lambda = 0.0;
    double rate = 0.0;

    double factor(double scaled_offset) const;
};

WeibullParams weibull_params(double a, double xi);

// Counts results forced back into [0, 1] after an approximation.
struct ClampTally {
    std::size_t evaluations = 0;
    std::size_t clamped = 0;
    double rate() const { return evaluations ? static_cast<double>(clamped) / evaluations : 0.0; }
    void merge(const ClampTally& other) {
        evaluations += other.evaluations;
        clamped += other.clamped;
    }
};

// Circular Gaussian spot of radius W centred at distance r0 from the
// aperture centre, as a difference of Marcum Q-functions.
double disk_transmittance_exact(double r0, double W, double a);
double annular_transmittance_exact(double r0, double W, const ApertureGeometry& geom);

// Weibull-type approximation of the annular map.
double annular_transmittance_approx(double r0, double W, const ApertureGeometry& geom,
                                    ClampTally* tally = nullptr);

// Radius of the circular spot standing in for an ellipse with semi-axes
// W1, W2 whose W1-axis makes angle chi with the deflection direction.
double effective_spot(double chi, double a, double W1, double W2);

// Transmittance of a centred elliptic spot through a disk of radius a.
double elliptic_max_transmittance(double a, double W1, double W2, ClampTally* tally = nullptr);

// Sampled elliptic beam: centroid, log-variables of the squared semi-axes
// (W_i^2 = W0^2 exp(theta_i)), and orientation of the W1 axis.
struct EllipticBeamState {
    double x0 = 0.0;
    double y0 = 0.0;
    double theta1 = 0.0;
    double theta2 = 0.0;
    double phi = 0.0;
};

// Orientation folded into [0, pi/2); a shift by an odd multiple of pi/2
// swaps the two semi-axes so the physical ellipse is unchanged.
EllipticBeamState canonical_state(const EllipticBeamState& state);

double elliptic_transmittance(const EllipticBeamState& state, const ApertureGeometry& geom, double W0,
                              ClampTally* tally = nullptr);

}  // namespace fadechan
