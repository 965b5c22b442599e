// SPDX-License-Identifier: Apache-2.0
#include "fadechan/aperture/aperture.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "fadechan/error.hpp"
#include "fadechan/numerics/special.hpp"

namespace fadechan {

namespace {

constexpr double kSeriesLimit = 0.5;

double clamp_unit(double v, ClampTally* tally) {
    double out = v;
    if (!(v >= 0.0)) out = 0.0;
    else if (v > 1.0) out = 1.0;
    if (tally) {
        ++tally->evaluations;
        if (out != v) ++tally->clamped;
    }
    return out;
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be positive and finite");
}

// With x = a^2 xi^2:
//   d   = 1 - e^{-x} I0(x)        = -sum_{k>=1} (1/2)_k / k!^2 (-2x)^k
//   n   = 2(1 - e^{-x/2}) - d
//   i1s = e^{-x} I1(x) / x        = (1/2) M(3/2, 3, -2x)
// returned as d/x, n/x^2, i1s. Alternating series, used for x < 0.5 where
// the closed forms cancel.
struct SmallArgTerms {
    double d_over_x;
    double n_over_x2;
    double i1_scaled;
};

SmallArgTerms small_arg_terms(double x) {
    // Coefficients of x^k: d_k = -(1/2)_k (-2)^k / k!^2, e_k = -2 (-1/2)^k / k!
    // (series of 2 eta0), m_k = (3/2)_k (-2)^k / ((3)_k k!).
    double dk = 1.0, ek = 1.0, mk = 1.0, xp = 1.0;
    double d = 0.0, n = 0.0, m = 0.0;
    for (int k = 1; k <= 80; ++k) {
        const double kk = k;
        d += dk * xp;
        if (k >= 2) n += (ek - dk) * xp / x;
        m += mk * xp;
        mk *= (kk + 0.5) / ((kk + 2.0) * kk) * -2.0;
        dk *= (kk + 0.5) / ((kk + 1.0) * (kk + 1.0)) * -2.0;
        ek *= -0.5 / (kk + 1.0);
        xp *= x;
        if (k >= 2 && std::abs(dk * xp) < 1e-18 * std::abs(d) && std::abs(mk * xp) < 1e-18) break;
    }
    return {d, n, 0.5 * m};
}

}  // namespace

void ApertureGeometry::validate() const {
    if (!(a1 > 0.0) || !std::isfinite(a1)) throw DomainError("outer radius a1 must be positive");
    if (!(a2 >= 0.0) || !(a2 < a1)) throw DomainError("inner radius a2 must satisfy 0 <= a2 < a1");
    if (!(d0 >= 0.0) || !std::isfinite(d0)) throw DomainError("offset d0 must be non-negative");
}

double WeibullParams::factor(double scaled_offset) const {
    if (scaled_offset <= 0.0) return 1.0;
    return std::exp(-rate * std::pow(scaled_offset, lambda));
}

WeibullParams weibull_params(double a, double xi) {
    require_positive(a, "aperture radius");
    require_positive(xi, "inverse width");
    const double x = a * a * xi * xi;
    WeibullParams p;
    p.eta0 = -std::expm1(-0.5 * x);
    if (x < kSeriesLimit) {
        const auto t = small_arg_terms(x);
        // rate = ln(2 eta0 / d) = ln(1 + n/d); lambda = 2 x e^{-x} I1 / (d * rate)
        p.rate = std::log1p(x * t.n_over_x2 / t.d_over_x);
        p.lambda = 2.0 * x * t.i1_scaled / (t.d_over_x * p.rate);
    } else {
        const double d = 1.0 - bessel_i0e(x);
        p.rate = std::log(2.0 * p.eta0 / d);
        p.lambda = 2.0 * x * bessel_i1e(x) / d / p.rate;
    }
    p.R = std::pow(p.rate, -1.0 / p.lambda);
    return p;
}

double disk_transmittance_exact(double r0, double W, double a) {
    require_positive(W, "spot radius");
    if (!(r0 >= 0.0)) throw DomainError("offset must be non-negative");
    if (a <= 0.0) return 0.0;
    return 1.0 - marcum_q(2.0 * r0 / W, 2.0 * a / W);
}

double annular_transmittance_exact(double r0, double W, const ApertureGeometry& geom) {
    require_positive(W, "spot radius");
    if (!(r0 >= 0.0)) throw DomainError("offset must be non-negative");
    const double q_inner = geom.a2 > 0.0 ? marcum_q(2.0 * r0 / W, 2.0 * geom.a2 / W) : 1.0;
    const double eta = q_inner - marcum_q(2.0 * r0 / W, 2.0 * geom.a1 / W);
    return std::min(1.0, std::max(0.0, eta));
}

double annular_transmittance_approx(double r0, double W, const ApertureGeometry& geom, ClampTally* tally) {
    require_positive(W, "spot radius");
    if (!(r0 >= 0.0)) throw DomainError("offset must be non-negative");
    double eta = 0.0;
    for (int n : {1, 2}) {
        const double a = geom.radius(n);
        if (a <= 0.0) continue;
        const auto p = weibull_params(a, 2.0 / W);
        eta += (n == 1 ? 1.0 : -1.0) * p.eta0 * p.factor(r0 / a);
    }
    return clamp_unit(eta, tally);
}

double effective_spot(double chi, double a, double W1, double W2) {
    require_positive(a, "aperture radius");
    require_positive(W1, "semi-axis W1");
    require_positive(W2, "semi-axis W2");
    const double c2 = std::cos(chi) * std::cos(chi);
    const double s2 = 1.0 - c2;
    const double y = std::log(4.0 * a * a / (W1 * W2)) + a * a / (W1 * W1) * (1.0 + 2.0 * c2) +
                     a * a / (W2 * W2) * (1.0 + 2.0 * s2);
    return 2.0 * a / std::sqrt(lambert_w0_exp(y));
}

double elliptic_max_transmittance(double a, double W1, double W2, ClampTally* tally) {
    require_positive(a, "aperture radius");
    require_positive(W1, "semi-axis W1");
    require_positive(W2, "semi-axis W2");
    if (W1 == W2) return clamp_unit(-std::expm1(-2.0 * a * a / (W1 * W1)), tally);
    const double inv1 = 1.0 / (W1 * W1), inv2 = 1.0 / (W2 * W2);
    const double diff = a * a * std::abs(inv1 - inv2);
    // I0(diff) e^{-a^2(1/W1^2 + 1/W2^2)} = i0e(diff) e^{-2 a^2 / max(W)^2}
    const double centred = bessel_i0e(diff) * std::exp(diff - a * a * (inv1 + inv2));
    const double xi = std::abs(1.0 / W1 - 1.0 / W2);
    const auto p = weibull_params(a, xi);
    const double ratio = (W1 + W2) / std::abs(W1 - W2);
    const double eta = 1.0 - centred - 2.0 * p.eta0 * p.factor(ratio);
    return clamp_unit(eta, tally);
}

EllipticBeamState canonical_state(const EllipticBeamState& state) {
    constexpr double quarter = 0.5 * std::numbers::pi;
    EllipticBeamState out = state;
    const double turns = std::floor(state.phi / quarter);
    out.phi = state.phi - turns * quarter;
    if (out.phi >= quarter) out.phi -= quarter;  // rounding at the upper edge
    if (out.phi < 0.0) out.phi = 0.0;
    if (std::fmod(std::abs(turns), 2.0) == 1.0) std::swap(out.theta1, out.theta2);
    return out;
}

double elliptic_transmittance(const EllipticBeamState& state, const ApertureGeometry& geom, double W0,
                              ClampTally* tally) {
    require_positive(W0, "initial spot radius");
    const auto s = canonical_state(state);
    const double W1 = W0 * std::exp(0.5 * s.theta1);
    const double W2 = W0 * std::exp(0.5 * s.theta2);
    const double r0 = std::hypot(s.x0, s.y0);
    const double chi = std::remainder(s.phi - std::atan2(s.y0, s.x0), std::numbers::pi);
    double eta = 0.0;
    for (int n : {1, 2}) {
        const double a = geom.radius(n);
        if (a <= 0.0) continue;
        const double peak = elliptic_max_transmittance(a, W1, W2);
        const auto p = weibull_params(a, 2.0 / effective_spot(chi, a, W1, W2));
        eta += (n == 1 ? 1.0 : -1.0) * peak * p.factor(r0 / a);
    }
    return clamp_unit(eta, tally);
}

}  // namespace fadechan
