// SPDX-License-Identifier: Apache-2.0
#include "fadechan/turbulence/realization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fadechan/error.hpp"
#include "fadechan/numerics/quadrature.hpp"
#include "fadechan/numerics/rng.hpp"
#include "fadechan/turbulence/screens.hpp"

namespace fadechan {

namespace {

constexpr double kPi = std::numbers::pi;

// cos and sin of x without library calls so the loop vectorizes: reduce to
// [-pi, pi], evaluate at half angle by Taylor polynomials (|y| <= pi/2,
// truncation below 5e-14), then double the angle.
inline void cis(double x, double& c, double& s) {
    constexpr double inv_two_pi = 0.15915494309189535;
    constexpr double two_pi_hi = 6.283185307179586;
    constexpr double two_pi_lo = 2.4492935982947064e-16;
    const double k = std::nearbyint(x * inv_two_pi);
    const double y = 0.5 * ((x - k * two_pi_hi) - k * two_pi_lo);
    const double y2 = y * y;
    double sp = 1.0 / 121645100408832000.0;  // 1/19!
    sp = sp * -y2 + 1.0 / 355687428096000.0;
    sp = sp * -y2 + 1.0 / 1307674368000.0;
    sp = sp * -y2 + 1.0 / 6227020800.0;
    sp = sp * -y2 + 1.0 / 39916800.0;
    sp = sp * -y2 + 1.0 / 362880.0;
    sp = sp * -y2 + 1.0 / 5040.0;
    sp = sp * -y2 + 1.0 / 120.0;
    sp = sp * -y2 + 1.0 / 6.0;
    const double sh = y - y * y2 * sp;
    double cp = 1.0 / 6402373705728000.0;  // 1/18!
    cp = cp * -y2 + 1.0 / 20922789888000.0;
    cp = cp * -y2 + 1.0 / 87178291200.0;
    cp = cp * -y2 + 1.0 / 479001600.0;
    cp = cp * -y2 + 1.0 / 3628800.0;
    cp = cp * -y2 + 1.0 / 40320.0;
    cp = cp * -y2 + 1.0 / 720.0;
    cp = cp * -y2 + 1.0 / 24.0;
    cp = cp * -y2 + 0.5;
    const double ch = 1.0 - y2 * cp;
    s = 2.0 * sh * ch;
    c = (ch - sh) * (ch + sh);
}

std::size_t next_pow2(double x) {
    std::size_t n = 1;
    while (static_cast<double>(n) < x) n <<= 1;
    return n;
}

}  // namespace

RealizationEngine::RealizationEngine(const ChannelParams& params, double a1, double a2, double window_radius,
                                     const RealizationGrid& grid)
    : params_(params), a1_(a1), a2_(a2), window_(std::max(window_radius, a1)), grid_(grid) {
    params_.validate();
    if (!(a1 > a2) || !(a2 >= 0.0)) throw DomainError("realization engine needs a1 > a2 >= 0");
    if (grid_.layers < 2 || grid_.layers % 2 != 0) throw DomainError("layer count must be even and >= 2");
    const double W0 = params_.W0;
    c_ = params_.receiver_scale();
    intensity_scale_ = c_ * c_ / (4.0 * kPi * kPi) * 2.0 / (kPi * W0 * W0);

    // Receiver bandwidth: interference across the illuminated source plus
    // the finest turbulent structure, set by the spherical-wave coherence
    // radius (3/8 C rho^(5/3) = 2).
    const double coef = params_.structure_coefficient();
    const double coherence_radius = coef > 0.0 ? std::pow(16.0 / (3.0 * coef), 0.6) : 0.0;
    const double turb_band = coef > 0.0 ? 4.0 / coherence_radius : 0.0;
    const double band = grid_.receiver_oversampling * (2.0 * c_ * 2.5 * W0 + turb_band);
    const double receiver_step = kPi / band;

    // Source spacing: the receiver window sets the fastest source-plane
    // oscillation; the Gaussian envelope and turbulence add their own width.
    const double source_band = grid_.source_oversampling * (c_ * window_ + 10.0 / W0 + turb_band);
    const double h = 2.0 * kPi / source_band;
    const double s_max = grid_.source_extent * W0;
    const auto ns = static_cast<int>(std::ceil(s_max / h));
    const double g = params_.curvature() * params_.omega();
    for (int i = -ns; i <= ns; ++i) {
        for (int j = -ns; j <= ns; ++j) {
            const double x = i * h, y = j * h;
            const double s2 = x * x + y * y;
            if (s2 > s_max * s_max) continue;
            const std::complex<double> w =
                std::polar(h * h * std::exp(-s2 / (W0 * W0)), g * s2 / (W0 * W0));
            source_.push_back({x, y, w});
        }
    }

    // Receiver polar grid: Gauss-Legendre panels split at a2, a1 and the
    // window edge; angular points per ring grow with the ring radius.
    auto add_panel = [&](double lo, double hi, int disk) {
        if (hi <= lo) return;
        const auto nr = static_cast<std::size_t>(std::ceil((hi - lo) / receiver_step)) + 2;
        const auto rule = gauss_legendre(nr, lo, hi);
        for (std::size_t k = 0; k < nr; ++k) {
            const double r = rule.nodes[k];
            const auto nth = static_cast<std::size_t>(std::ceil(2.0 * kPi * r / receiver_step)) + 8;
            const double dth = 2.0 * kPi / static_cast<double>(nth);
            const double offset = (k % 2) * 0.5 * dth;
            for (std::size_t m = 0; m < nth; ++m) {
                const double th = offset + static_cast<double>(m) * dth;
                receiver_.push_back({r * std::cos(th), r * std::sin(th), rule.weights[k] * r * dth, disk});
            }
        }
    };
    add_panel(0.0, a2_, 2);
    add_panel(a2_, a1_, 1);
    add_panel(a1_, window_, 0);

    const auto layer_rule = gauss_legendre(grid_.layers, 0.0, 1.0);
    layer_pos_ = layer_rule.nodes;
    layer_weight_ = layer_rule.weights;

    if (coef > 0.0) {
        const double reach = std::max(window_, s_max);
        const double target_pixel = grid_.screen_pixel > 0.0 ? grid_.screen_pixel : 0.5 * std::min(h, receiver_step);
        // The FFT part is periodic; a period of twice the largest separation
        // (the diameter 2 * reach) keeps wrap-around correlations away.
        const double span = 4.1 * reach;
        std::size_t n = next_pow2(span / target_pixel);
        n = std::clamp(n, grid_.min_screen, grid_.max_screen);
        const double pixel = span / static_cast<double>(n);
        synth_ = std::make_unique<ScreenSynthesizer>(n, pixel, grid_.subharmonic_levels);
        const double centre = 0.5 * static_cast<double>(n);
        layer_u_.resize(grid_.layers);
        layer_v_.resize(grid_.layers);
        for (std::size_t l = 0; l < grid_.layers; ++l) {
            const double shrink = (1.0 - layer_pos_[l]) / pixel;
            for (const auto& sp : source_) {
                layer_u_[l].push_back(shrink * sp.x + centre);
                layer_v_[l].push_back(shrink * sp.y + centre);
            }
        }
    }
}

RealizationEngine::~RealizationEngine() = default;

std::size_t RealizationEngine::screen_size() const { return synth_ ? synth_->size() : 0; }
double RealizationEngine::screen_pixel() const { return synth_ ? synth_->pixel() : 0.0; }

RealizationMoments RealizationEngine::sample(std::uint64_t seed, std::uint64_t index) const {
    const std::size_t n_layers = grid_.layers;
    std::vector<PhaseScreen> screens(synth_ ? n_layers : 0);
    if (synth_) {
        RngStream rng(seed, index);
        const double coef = params_.structure_coefficient();
        for (std::size_t l = 0; l < n_layers; l += 2) {
            synth_->generate(rng, coef * layer_weight_[l], coef * layer_weight_[l + 1], screens[l], screens[l + 1]);
        }
    }

    const std::size_t ns = source_.size();
    const double pixel = synth_ ? synth_->pixel() : 1.0;
    const std::size_t stride = synth_ ? synth_->size() : 0;
    std::vector<double> theta(ns);
    RealizationMoments m;
    for (const auto& rp : receiver_) {
        for (std::size_t s = 0; s < ns; ++s) theta[s] = -c_ * (rp.x * source_[s].x + rp.y * source_[s].y);
        for (std::size_t l = 0; l < screens.size(); ++l) {
            const double ox = layer_pos_[l] * rp.x / pixel, oy = layer_pos_[l] * rp.y / pixel;
            const double* grid = screens[l].values.data();
            const double* u = layer_u_[l].data();
            const double* v = layer_v_[l].data();
            for (std::size_t s = 0; s < ns; ++s) {
                const double fx = ox + u[s], fy = oy + v[s];
                const auto ix = static_cast<std::size_t>(fx), iy = static_cast<std::size_t>(fy);
                const double tx = fx - static_cast<double>(ix), ty = fy - static_cast<double>(iy);
                const double* p = grid + ix * stride + iy;
                const double p00 = p[0], p01 = p[1], p10 = p[stride], p11 = p[stride + 1];
                theta[s] += p00 + ty * (p01 - p00) + tx * ((p10 - p00) + ty * (p11 - p10 - p01 + p00));
            }
        }
        double re = 0.0, im = 0.0;
        for (std::size_t s = 0; s < ns; ++s) {
            double cs, sn;
            cis(theta[s], cs, sn);
            const auto& w = source_[s].weight;
            re += w.real() * cs - w.imag() * sn;
            im += w.real() * sn + w.imag() * cs;
        }
        const double I = intensity_scale_ * (re * re + im * im) * rp.weight;
        m.power += I;
        if (rp.disk >= 1) m.eta1 += I;
        if (rp.disk == 2) m.eta2 += I;
        m.xc += rp.x * I;
        m.yc += rp.y * I;
        m.sxx += rp.x * rp.x * I;
        m.syy += rp.y * rp.y * I;
    }
    return m;
}

}  // namespace fadechan
