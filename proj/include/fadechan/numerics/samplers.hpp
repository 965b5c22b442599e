// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include "fadechan/numerics/rng.hpp"

namespace fadechan {

// Multivariate normal sampler. The covariance is factorized once through a
// symmetric eigendecomposition; eigenvalues above -1e-12*trace are clamped
// to zero (reported by clamped()), anything more negative is rejected.
class GaussianVectorSampler {
public:
    GaussianVectorSampler(Eigen::VectorXd mean, const Eigen::MatrixXd& cov);

    Eigen::VectorXd sample(RngStream& rng) const;
    const Eigen::VectorXd& mean() const noexcept { return mean_; }
    const Eigen::MatrixXd& factor() const noexcept { return factor_; }
    bool clamped() const noexcept { return clamped_; }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd factor_;
    bool clamped_ = false;
};

Eigen::VectorXd sample_gaussian_vec(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, RngStream& rng);

// Length of a 2-D Gaussian vector with mean (nu, 0) and per-axis deviation
// sigma. The Rayleigh sampler is the nu = 0 case, draw for draw.
double sample_rice(double nu, double sigma, RngStream& rng);
double sample_rayleigh(double sigma, RngStream& rng);

// Orientation angle on the quarter period [0, pi/2): uniform, or a normal
// variate with the given centre and deviation wrapped onto the period.
struct AngleMode {
    enum class Kind { uniform, wrapped_gaussian };
    Kind kind = Kind::uniform;
    double center = 0.0;
    double sigma = 0.0;

    static AngleMode uniform() { return {}; }
    static AngleMode wrapped_gaussian(double center, double sigma) {
        return {Kind::wrapped_gaussian, center, sigma};
    }
};
double sample_wrapped_angle(const AngleMode& mode, RngStream& rng);

}  // namespace fadechan
