// SPDX-License-Identifier: Apache-2.0
#include "fadechan/turbulence/screens.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "fadechan/error.hpp"
#include "fadechan/numerics/quadrature.hpp"

namespace fadechan {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)) {
        if (!data) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
};

// Unit-coefficient Kolmogorov phase spectrum: A kappa^(-11/3) with
// D(rho) = 4 pi A I rho^(5/3), I = kolmogorov_spectrum_integral().
double unit_spectrum(double kappa) {
    static const double A = 1.0 / (4.0 * kPi * kolmogorov_spectrum_integral());
    return A * std::pow(kappa, -11.0 / 3.0);
}

// Weight of the single mode representing the square frequency cell of
// width w centred on (kx, ky), which must not contain the origin: the
// cell integral of kappa^2 times the spectrum divided by the centre's
// kappa^2. This reproduces the cell's contribution to the structure
// function at separations short against the mode wavelength, which is the
// regime of the low-frequency cells where the weighting matters.
double cell_power(double kx, double ky, double w) {
    const double k2 = kx * kx + ky * ky;
    const double reach = std::max(std::abs(kx), std::abs(ky)) / w;
    const std::size_t order = reach < 1.5 ? 24 : reach < 4.5 ? 8 : reach < 16.5 ? 3 : 1;
    if (order == 1) return unit_spectrum(std::sqrt(k2)) * w * w;
    const auto rule = gauss_legendre(order, -0.5 * w, 0.5 * w);
    double sum = 0.0;
    for (std::size_t a = 0; a < order; ++a) {
        for (std::size_t b = 0; b < order; ++b) {
            const double qx = kx + rule.nodes[a], qy = ky + rule.nodes[b];
            const double q2 = qx * qx + qy * qy;
            sum += rule.weights[a] * rule.weights[b] * unit_spectrum(std::sqrt(q2)) * q2;
        }
    }
    return sum / k2;
}

// Per-axis variance of a random tilt standing in for all frequencies in
// the square [-h, h]^2: to quadratic order in the separation the missing
// structure function is rho^2 (1/2) int kappa^(-5/3) A d^2 kappa, and
// int over the square of kappa^(-5/3) = 24 h^(1/3) int_0^(pi/4) cos^(-1/3).
double residual_tilt_variance(double h) {
    static const double A = 1.0 / (4.0 * kPi * kolmogorov_spectrum_integral());
    const auto angle = adaptive_quad_1d([](double t) { return std::pow(std::cos(t), -1.0 / 3.0); }, 0.0, kPi / 4.0,
                                        1e-13);
    return 0.5 * A * 24.0 * std::cbrt(h) * angle.value;
}

}  // namespace

double kolmogorov_spectrum_integral() {
    // -2^(-8/3) Gamma(-5/6) / Gamma(11/6)
    return -std::pow(2.0, -8.0 / 3.0) * std::tgamma(-5.0 / 6.0) / std::tgamma(11.0 / 6.0);
}

double PhaseScreen::at(double x, double y) const {
    const double half = 0.5 * static_cast<double>(size);
    const double fx = x / pixel + half, fy = y / pixel + half;
    const double ix = std::floor(fx), iy = std::floor(fy);
    const double tx = fx - ix, ty = fy - iy;
    const auto i = static_cast<std::size_t>(ix), j = static_cast<std::size_t>(iy);
    const double* row0 = values.data() + i * size + j;
    const double* row1 = row0 + size;
    return (1.0 - tx) * ((1.0 - ty) * row0[0] + ty * row0[1]) + tx * ((1.0 - ty) * row1[0] + ty * row1[1]);
}

struct ScreenSynthesizer::Plan {
    fftw_plan plan = nullptr;
    ~Plan() {
        std::lock_guard lock(planner_mutex());
        if (plan) fftw_destroy_plan(plan);
    }
};

ScreenSynthesizer::ScreenSynthesizer(std::size_t size, double pixel, std::size_t subharmonic_levels)
    : size_(size), pixel_(pixel), levels_(subharmonic_levels), plan_(std::make_unique<Plan>()) {
    if (size < 8 || (size & (size - 1)) != 0) throw DomainError("screen size must be a power of two >= 8");
    if (!(pixel > 0.0)) throw DomainError("screen pixel must be positive");
    const std::size_t n = size_;
    const double dk = 2.0 * kPi / (static_cast<double>(n) * pixel_);
    amplitude_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double kx = dk * (i < n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n));
        for (std::size_t j = 0; j < n; ++j) {
            const double ky =
                dk * (j < n / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n));
            amplitude_[i * n + j] = (i == 0 && j == 0) ? 0.0 : std::sqrt(cell_power(kx, ky, dk));
        }
    }
    tilt_variance_ = residual_tilt_variance(0.5 * dk / std::pow(3.0, static_cast<double>(levels_)));
    FftwBuffer probe(n * n);
    std::lock_guard lock(planner_mutex());
    plan_->plan = fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), probe.data, probe.data, FFTW_BACKWARD,
                                   FFTW_ESTIMATE);
    if (!plan_->plan) throw Error("FFT planning failed");
}

ScreenSynthesizer::~ScreenSynthesizer() = default;

void ScreenSynthesizer::generate(RngStream& rng, double scale_first, double scale_second, PhaseScreen& first,
                                 PhaseScreen& second) const {
    const std::size_t n = size_;
    FftwBuffer buf(n * n);
    // Box-Muller: one pair of uniforms per complex coefficient.
    for (std::size_t idx = 0; idx < n * n; ++idx) {
        const double radius = std::sqrt(-2.0 * std::log(rng.uniform()));
        const double angle = 2.0 * kPi * rng.uniform();
        buf.data[idx][0] = amplitude_[idx] * radius * std::cos(angle);
        buf.data[idx][1] = amplitude_[idx] * radius * std::sin(angle);
    }
    fftw_execute_dft(plan_->plan, buf.data, buf.data);

    // Subharmonics: level p adds a 3 x 3 frequency patch (centre removed)
    // with spacing dk / 3^p. Every mode is separable, so the sum over all
    // levels is a rank 2 * levels + 1 product: one column per distinct
    // x-frequency (the zero frequency is shared by all levels).
    if (levels_ > 0) {
        const double dk = 2.0 * kPi / (static_cast<double>(n) * pixel_);
        const double half = 0.5 * static_cast<double>(n);
        const auto rank = static_cast<Eigen::Index>(2 * levels_ + 1);
        Eigen::MatrixXcd xs(static_cast<Eigen::Index>(n), rank), ys(static_cast<Eigen::Index>(n), rank);
        xs.col(0).setOnes();
        ys.setZero();
        for (std::size_t p = 1; p <= levels_; ++p) {
            const double dkp = dk / std::pow(3.0, static_cast<double>(p));
            for (int mx = -1; mx <= 1; ++mx) {
                const Eigen::Index col = mx == 0 ? 0 : static_cast<Eigen::Index>(2 * p - (mx < 0 ? 1 : 0));
                if (mx != 0) {
                    for (std::size_t i = 0; i < n; ++i)
                        xs(static_cast<Eigen::Index>(i), col) =
                            std::polar(1.0, mx * dkp * (static_cast<double>(i) - half) * pixel_);
                }
                for (int my = -1; my <= 1; ++my) {
                    if (mx == 0 && my == 0) continue;
                    const double amp = std::sqrt(cell_power(mx * dkp, my * dkp, dkp));
                    const std::complex<double> coef(amp * rng.normal(), amp * rng.normal());
                    for (std::size_t j = 0; j < n; ++j)
                        ys(static_cast<Eigen::Index>(j), col) +=
                            coef * std::polar(1.0, my * dkp * (static_cast<double>(j) - half) * pixel_);
                }
            }
        }
        const Eigen::MatrixXcd sum = xs * ys.transpose();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const std::complex<double> v = sum(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                buf.data[i * n + j][0] += v.real();
                buf.data[i * n + j][1] += v.imag();
            }
        }
    }

    // Frequencies inside the innermost uncovered cell act on the grid as a
    // tilt.
    {
        const double sigma = std::sqrt(tilt_variance_);
        const double half = 0.5 * static_cast<double>(n);
        const double gx1 = sigma * rng.normal(), gy1 = sigma * rng.normal();
        const double gx2 = sigma * rng.normal(), gy2 = sigma * rng.normal();
        for (std::size_t i = 0; i < n; ++i) {
            const double x = (static_cast<double>(i) - half) * pixel_;
            for (std::size_t j = 0; j < n; ++j) {
                const double y = (static_cast<double>(j) - half) * pixel_;
                buf.data[i * n + j][0] += gx1 * x + gy1 * y;
                buf.data[i * n + j][1] += gx2 * x + gy2 * y;
            }
        }
    }

    // The FFT grid puts frequency index 0 at sample 0; shifting the sample
    // origin to the grid centre only changes the phase of each mode, which
    // leaves the statistics unchanged, so samples are used as they come.
    first.size = second.size = n;
    first.pixel = second.pixel = pixel_;
    first.values.resize(n * n);
    second.values.resize(n * n);
    const double s1 = std::sqrt(scale_first), s2 = std::sqrt(scale_second);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t idx = 0; idx < n * n; ++idx) {
        m1 += buf.data[idx][0];
        m2 += buf.data[idx][1];
    }
    m1 /= static_cast<double>(n * n);
    m2 /= static_cast<double>(n * n);
    for (std::size_t idx = 0; idx < n * n; ++idx) {
        first.values[idx] = s1 * (buf.data[idx][0] - m1);
        second.values[idx] = s2 * (buf.data[idx][1] - m2);
    }
}

}  // namespace fadechan
