// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

namespace fadechan {

// Wavefront curvature of the transmitted beam. A collimated beam has a flat
// phase front at the transmitter; a focused beam converges on the receiver
// plane (focal length equal to the path length).
enum class BeamFocus { collimated, focused };

using Vec2 = std::array<double, 2>;

// Source and path parameters. Derived quantities are recomputed on every
// call so they can never be stale.
struct ChannelParams {
    double wavelength = 800e-9;  // m
    double W0 = 0.02;            // transmitter spot radius, m
    double Cn2 = 1e-14;          // refractive-index structure constant, m^(-2/3)
    double L = 1000.0;           // path length, m
    BeamFocus focus = BeamFocus::collimated;

    // Throws DomainError unless wavelength, W0, L > 0 and Cn2 >= 0.
    void validate() const;

    double k() const;           // optical wavenumber 2 pi / wavelength
    double omega() const;       // Fresnel parameter k W0^2 / (2 L)
    double rytov2() const;      // 1.23 Cn2 k^(7/6) L^(11/6)
    double curvature() const;   // 1 - L/F: 1 when collimated, 0 when focused
    double receiver_scale() const { return k() / L; }
    // Squared radius of the diffraction-limited spot at the receiver.
    double vacuum_radius2() const;
    // Coefficient C of D(rho) = C |rho|^(5/3) for equal separations at both
    // ends of the path: 2 Cn2 k^2 L.
    double structure_coefficient() const;
};

}  // namespace fadechan
