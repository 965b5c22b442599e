// SPDX-License-Identifier: Apache-2.0
#include "fadechan/numerics/qmc.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "fadechan/error.hpp"
#include "fadechan/numerics/parallel.hpp"
#include "fadechan/numerics/sobol.hpp"
#include "fadechan/numerics/special.hpp"

namespace fadechan {

ComplexQuadResult gauss_weighted_qmc(std::size_t dim, std::span<const double> sigma, const QmcIntegrand& integrand,
                                     std::size_t n_samples, RngStream& rng, std::size_t replicates) {
    if (dim == 0 || dim > 10 || dim % 2 != 0) throw DomainError("gauss_weighted_qmc: dim must be 2, 4, 6, 8 or 10");
    if (sigma.size() != dim) throw DomainError("gauss_weighted_qmc: one width per axis required");
    for (double s : sigma) {
        if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("gauss_weighted_qmc: widths must be positive");
    }
    if (n_samples == 0) throw DomainError("gauss_weighted_qmc: n_samples must be positive");
    if (replicates < 2) throw DomainError("gauss_weighted_qmc: at least two replicates required");

    double norm = std::pow(2.0 * std::numbers::pi, 0.5 * static_cast<double>(dim));
    for (double s : sigma) norm *= s;

    const std::size_t per_replicate = (n_samples + replicates - 1) / replicates;
    std::vector<SobolSequence> nets;
    nets.reserve(replicates);
    for (std::size_t r = 0; r < replicates; ++r) {
        nets.emplace_back(dim);
        nets.back().scramble(rng);
    }

    std::vector<std::complex<double>> means(replicates);
    parallel_for(replicates, [&](std::size_t r) {
        std::array<double, 10> u{};
        std::array<double, 10> x{};
        std::complex<double> sum = 0.0;
        for (std::size_t i = 0; i < per_replicate; ++i) {
            nets[r].point(i, std::span<double>(u.data(), dim));
            for (std::size_t d = 0; d < dim; ++d) x[d] = sigma[d] * normal_quantile(u[d]);
            sum += integrand(std::span<const double>(x.data(), dim));
        }
        means[r] = norm * sum / static_cast<double>(per_replicate);
    });

    ComplexQuadResult out;
    std::complex<double> total = 0.0;
    for (const auto& m : means) total += m;
    out.value = total / static_cast<double>(replicates);
    double var_re = 0.0;
    double var_im = 0.0;
    for (const auto& m : means) {
        var_re += std::pow(m.real() - out.value.real(), 2);
        var_im += std::pow(m.imag() - out.value.imag(), 2);
    }
    const double denom = static_cast<double>(replicates) * static_cast<double>(replicates - 1);
    out.error_real = std::sqrt(var_re / denom);
    out.error_imag = std::sqrt(var_im / denom);
    out.evaluations = per_replicate * replicates;
    out.replicate_values = std::move(means);
    return out;
}

}  // namespace fadechan
