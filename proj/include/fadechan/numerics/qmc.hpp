// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fadechan/numerics/rng.hpp"

namespace fadechan {

struct ComplexQuadResult {
    std::complex<double> value;
    double error_real = 0.0;  // standard error of the real part
    double error_imag = 0.0;  // standard error of the imaginary part
    std::size_t evaluations = 0;
    std::vector<std::complex<double>> replicate_values;  // one estimate per randomization
};

using QmcIntegrand = std::function<std::complex<double>(std::span<const double>)>;

inline constexpr std::size_t kDefaultQmcReplicates = 16;

// Integral over R^dim of integrand(x) * exp(-sum_i x_i^2 / (2 sigma_i^2)).
// Points are scrambled Sobol points pushed through the normal quantile and
// scaled by sigma_i, so the Gaussian factor is sampled exactly and only the
// remaining factor is averaged. `replicates` independent scramblings give
// the standard error; replicates run concurrently.
ComplexQuadResult gauss_weighted_qmc(std::size_t dim, std::span<const double> sigma, const QmcIntegrand& integrand,
                                     std::size_t n_samples, RngStream& rng,
                                     std::size_t replicates = kDefaultQmcReplicates);

}  // namespace fadechan
