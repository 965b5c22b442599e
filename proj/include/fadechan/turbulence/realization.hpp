// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "fadechan/turbulence/channel.hpp"

namespace fadechan {

class ScreenSynthesizer;

// Discretization controls for the phase-realization estimator.
struct RealizationGrid {
    std::size_t layers = 6;             // phase layers along the path (even)
    double window_factor = 2.5;         // window radius: max(factor * W_LT, a1 + W_LT)
    double source_oversampling = 1.25;  // safety factor on the source spacing
    double receiver_oversampling = 0.6;  // safety factor on the receiver spacing
    double screen_pixel = 0.0;          // 0: half the finer of the two spacings
    double source_extent = 4.0;         // source disk radius in units of W0
    std::size_t subharmonic_levels = 6;
    std::size_t min_screen = 64;
    std::size_t max_screen = 1024;
};

// Receiver-plane integrals of one intensity realization. The intensity is
// normalized to unit total power over the whole plane; the moments are
// taken over the receiver window.
struct RealizationMoments {
    double eta1 = 0.0;  // power in the disk of radius a1
    double eta2 = 0.0;  // power in the disk of radius a2
    double xc = 0.0;    // integral of x I
    double yc = 0.0;    // integral of y I
    double sxx = 0.0;   // integral of x^2 I
    double syy = 0.0;   // integral of y^2 I
    double power = 0.0; // integral of I over the whole window
};

// Field at the receiver from a deterministic source quadrature under a
// layered straight-path phase: every source point s contributes to receiver
// point r with the sum of layer screens sampled at xi_l r + (1 - xi_l) s.
// With Gauss-Legendre layer positions and weights this reproduces the
// path-integrated structure function.
class RealizationEngine {
public:
    RealizationEngine(const ChannelParams& params, double a1, double a2, double window_radius,
                      const RealizationGrid& grid = {});
    ~RealizationEngine();
    RealizationEngine(const RealizationEngine&) = delete;
    RealizationEngine& operator=(const RealizationEngine&) = delete;

    // Realization `index` of the stream family rooted at `seed`. Pure and
    // thread-safe.
    RealizationMoments sample(std::uint64_t seed, std::uint64_t index) const;

    std::size_t source_points() const { return source_.size(); }
    std::size_t receiver_points() const { return receiver_.size(); }
    std::size_t screen_size() const;
    double screen_pixel() const;
    double window_radius() const { return window_; }

private:
    struct SourcePoint {
        double x, y;
        std::complex<double> weight;
    };
    struct ReceiverPoint {
        double x, y, weight;
        int disk;  // 2: inside a2, 1: inside a1 only, 0: outside a1
    };

    ChannelParams params_;
    double a1_, a2_, window_;
    RealizationGrid grid_;
    double c_;
    double intensity_scale_;
    std::vector<SourcePoint> source_;
    std::vector<ReceiverPoint> receiver_;
    std::vector<double> layer_pos_, layer_weight_;
    // Per layer: source coordinates in screen pixels, (1 - xi) s / pixel
    // shifted to the grid centre.
    std::vector<std::vector<double>> layer_u_, layer_v_;
    std::unique_ptr<ScreenSynthesizer> synth_;
};

}  // namespace fadechan
