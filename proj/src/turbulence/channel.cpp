// SPDX-License-Identifier: Apache-2.0
#include "fadechan/turbulence/channel.hpp"

#include <cmath>
#include <numbers>

#include "fadechan/error.hpp"

namespace fadechan {

void ChannelParams::validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(wavelength)) throw DomainError("wavelength must be positive");
    if (!positive(W0)) throw DomainError("W0 must be positive");
    if (!positive(L)) throw DomainError("path length L must be positive");
    if (!(Cn2 >= 0.0) || !std::isfinite(Cn2)) throw DomainError("Cn2 must be non-negative");
}

double ChannelParams::k() const { return 2.0 * std::numbers::pi / wavelength; }

double ChannelParams::omega() const { return k() * W0 * W0 / (2.0 * L); }

double ChannelParams::rytov2() const { return 1.23 * Cn2 * std::pow(k(), 7.0 / 6.0) * std::pow(L, 11.0 / 6.0); }

double ChannelParams::curvature() const { return focus == BeamFocus::collimated ? 1.0 : 0.0; }

double ChannelParams::vacuum_radius2() const {
    const double g = curvature() * omega();
    return W0 * W0 * (1.0 + g * g) / (omega() * omega());
}

double ChannelParams::structure_coefficient() const { return 2.0 * Cn2 * k() * k() * L; }

}  // namespace fadechan
