// SPDX-License-Identifier: Apache-2.0
#include "fadechan/numerics/samplers.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fadechan/error.hpp"

namespace fadechan {

GaussianVectorSampler::GaussianVectorSampler(Eigen::VectorXd mean, const Eigen::MatrixXd& cov)
    : mean_(std::move(mean)) {
    const auto n = mean_.size();
    if (cov.rows() != n || cov.cols() != n) throw DomainError("gaussian sampler: covariance shape mismatch");
    if (!cov.allFinite() || !mean_.allFinite()) throw DomainError("gaussian sampler: non-finite input");
    const double scale = n > 0 ? cov.cwiseAbs().maxCoeff() : 0.0;
    if (n > 0 && (cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw DomainError("gaussian sampler: covariance not symmetric");
    }
    const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    Eigen::VectorXd values = eig.eigenvalues();
    const double threshold = 1e-12 * std::abs(sym.trace());
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values[i] < -threshold) {
            std::ostringstream msg;
            msg << "gaussian sampler: covariance eigenvalue " << i << " = " << values[i] << " is negative";
            throw DomainError(msg.str());
        }
        if (values[i] < 0.0) {
            values[i] = 0.0;
            clamped_ = true;
        }
    }
    factor_ = eig.eigenvectors() * values.cwiseSqrt().asDiagonal();
}

Eigen::VectorXd GaussianVectorSampler::sample(RngStream& rng) const {
    Eigen::VectorXd z(mean_.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return mean_ + factor_ * z;
}

Eigen::VectorXd sample_gaussian_vec(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, RngStream& rng) {
    return GaussianVectorSampler(mean, cov).sample(rng);
}

double sample_rice(double nu, double sigma, RngStream& rng) {
    if (!(sigma >= 0.0) || !(nu >= 0.0)) throw DomainError("sample_rice: parameters must be non-negative");
    const double x = nu + sigma * rng.normal();
    const double y = sigma * rng.normal();
    return std::hypot(x, y);
}

double sample_rayleigh(double sigma, RngStream& rng) { return sample_rice(0.0, sigma, rng); }

double sample_wrapped_angle(const AngleMode& mode, RngStream& rng) {
    constexpr double period = 0.5 * std::numbers::pi;
    if (mode.kind == AngleMode::Kind::uniform) return period * rng.uniform();
    if (!(mode.sigma >= 0.0)) throw DomainError("sample_wrapped_angle: negative deviation");
    double phi = std::fmod(mode.center + mode.sigma * rng.normal(), period);
    if (phi < 0.0) phi += period;
    if (phi >= period) phi = 0.0;
    return phi;
}

}  // namespace fadechan
