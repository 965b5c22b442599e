// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include "fadechan/numerics/rng.hpp"

namespace fadechan {

// Integral of x^(-8/3) (1 - J0(x)) over (0, inf); links the Kolmogorov
// phase spectrum to its structure function.
double kolmogorov_spectrum_integral();

// Square grid of N x N phase samples with spacing `pixel`, centred on the
// origin: sample (i, j) sits at ((i - N/2) pixel, (j - N/2) pixel).
struct PhaseScreen {
    std::size_t size = 0;
    double pixel = 0.0;
    std::vector<double> values;  // row-major, index i * size + j with i along x

    // Bilinear interpolation; positions must lie inside the grid.
    double at(double x, double y) const;
};

// Synthesizes pairs of independent Gaussian phase screens whose structure
// function is |rho|^(5/3) (unit coefficient): FFT of a randomly weighted
// Kolmogorov spectrum plus subharmonic levels that restore the large-scale
// part the grid cannot hold. The real and imaginary parts of one complex
// transform are the two screens.
class ScreenSynthesizer {
public:
    ScreenSynthesizer(std::size_t size, double pixel, std::size_t subharmonic_levels = 6);
    ~ScreenSynthesizer();
    ScreenSynthesizer(const ScreenSynthesizer&) = delete;
    ScreenSynthesizer& operator=(const ScreenSynthesizer&) = delete;

    std::size_t size() const noexcept { return size_; }
    double pixel() const noexcept { return pixel_; }

    // Fills `first` and `second` (resized as needed) and scales them so
    // their structure functions are scale_first * |rho|^(5/3) and
    // scale_second * |rho|^(5/3). Safe to call concurrently.
    void generate(RngStream& rng, double scale_first, double scale_second, PhaseScreen& first,
                  PhaseScreen& second) const;

private:
    struct Plan;
    std::size_t size_;
    double pixel_;
    std::size_t levels_;
    std::vector<double> amplitude_;  // sqrt of the cell-integrated spectrum
    double tilt_variance_ = 0.0;     // per axis, for the uncovered centre
    std::unique_ptr<Plan> plan_;
};

}  // namespace fadechan
